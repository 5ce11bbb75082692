#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "signsgd/harness.hpp"

namespace signsgd {
namespace {

const std::map<std::string, ProblemKind> kProblems = {
    {"rosenbrock", ProblemKind::Rosenbrock},
    {"counterexample", ProblemKind::Counterexample},
    {"quadratic", ProblemKind::Quadratic},
    {"partitioned-quadratic", ProblemKind::PartitionedQuadratic},
};

const std::map<std::string, OptimizerKind> kOptimizers = {
    {"signsgd-opt1", OptimizerKind::SignSgdPlain}, {"signsgd-opt2", OptimizerKind::SignSgdMonotone},
    {"majority-vote", OptimizerKind::MajorityVote}, {"ssdm", OptimizerKind::Ssdm},
    {"sgd", OptimizerKind::Sgd},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& text, int line, const std::string& key) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(value)) {
    fail(line, "key '" + key + "' expects a finite number, got '" + t + "'");
  }
  return value;
}

template <typename Int>
Int parse_int(const std::string& text, int line, const std::string& key) {
  const std::string t = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    fail(line, "key '" + key + "' expects an integer, got '" + t + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<double> out;
  if (trim(text).empty()) {
    return out;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(parse_double(item, line, key));
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += format_number(values[i]);
  }
  return out;
}

template <typename Kind>
std::string name_of(const std::map<std::string, Kind>& table, Kind kind) {
  for (const auto& [name, k] : table) {
    if (k == kind) {
      return name;
    }
  }
  return "?";
}

bool valid_id(const std::string& id) {
  if (id.empty()) {
    return false;
  }
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) {
      return false;
    }
  }
  return true;
}

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ConfigError(message);
  }
}

}  // namespace

std::string to_string(ProblemKind kind) { return name_of(kProblems, kind); }
std::string to_string(OptimizerKind kind) { return name_of(kOptimizers, kind); }

void ExperimentConfig::validate() const {
  require(valid_id(id), "id must be non-empty and use only [A-Za-z0-9._-]");
  require(description.find('\n') == std::string::npos, "description must be a single line");
  require(iterations >= 1, "iterations must be positive");
  require(minibatch >= 1, "minibatch must be positive");
  require(nodes >= 1, "nodes must be positive");
  require(reps >= 1, "reps must be positive");
  require(checkpoint >= 0, "checkpoint must be non-negative");
  require(rho_samples >= 0, "rho_samples must be non-negative");
  if (gamma) {
    require(*gamma > 0.0, "gamma must be positive");
  } else {
    require(optimizer == OptimizerKind::Ssdm, "gamma is required for " + to_string(optimizer));
  }
  if (beta) {
    require(optimizer == OptimizerKind::Ssdm, "beta applies to ssdm only");
    require(*beta >= 0.0 && *beta < 1.0, "beta must lie in [0, 1)");
  }
  for (double v : noise) {
    require(v >= 0.0, "noise entries must be non-negative");
  }

  std::int64_t d = 0;
  switch (problem) {
    case ProblemKind::Rosenbrock:
      require(dim >= 2, "rosenbrock needs dim >= 2");
      require(noise.size() <= 1, "rosenbrock noise is a single nu value");
      d = dim;
      break;
    case ProblemKind::Counterexample:
      require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
      require(noise.empty(), "counterexample takes no noise parameter");
      d = 2;
      break;
    case ProblemKind::Quadratic:
    case ProblemKind::PartitionedQuadratic:
      require(!curvature.empty(), "quadratic problems need a curvature list");
      for (double a : curvature) {
        require(a > 0.0, "curvature entries must be positive");
      }
      d = static_cast<std::int64_t>(curvature.size());
      require(noise.size() <= 1 || static_cast<std::int64_t>(noise.size()) == d,
              "noise must be a scalar or one value per coordinate");
      break;
  }
  if (problem == ProblemKind::PartitionedQuadratic) {
    require(static_cast<std::int64_t>(centers.size()) == nodes * d, "centers must hold nodes * dim values");
    require(weights.empty() || static_cast<std::int64_t>(weights.size()) == nodes,
            "weights must hold one value per node");
    for (double w : weights) {
      require(w > 0.0, "weights must be positive");
    }
  } else {
    require(centers.empty() && weights.empty(), "centers and weights apply to partitioned-quadratic only");
    const bool multi_node = optimizer == OptimizerKind::MajorityVote || optimizer == OptimizerKind::Ssdm;
    require(multi_node || nodes == 1, to_string(optimizer) + " runs on a single node");
  }
  require(x0.empty() || static_cast<std::int64_t>(x0.size()) == d, "x0 must match the problem dimension");
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "id = " << c.id << "\n";
  out << "description = " << c.description << "\n";
  out << "problem = " << to_string(c.problem) << "\n";
  out << "dim = " << c.dim << "\n";
  out << "eps = " << format_number(c.eps) << "\n";
  out << "curvature = " << join(c.curvature) << "\n";
  out << "centers = " << join(c.centers) << "\n";
  out << "weights = " << join(c.weights) << "\n";
  out << "noise = " << join(c.noise) << "\n";
  out << "x0 = " << join(c.x0) << "\n";
  out << "optimizer = " << to_string(c.optimizer) << "\n";
  out << "schedule = " << (c.schedule == StepSchedule::Kind::Constant ? "constant" : "inverse-sqrt") << "\n";
  if (c.gamma) {
    out << "gamma = " << format_number(*c.gamma) << "\n";
  }
  if (c.beta) {
    out << "beta = " << format_number(*c.beta) << "\n";
  }
  out << "iterations = " << c.iterations << "\n";
  out << "nodes = " << c.nodes << "\n";
  out << "minibatch = " << c.minibatch << "\n";
  out << "reps = " << c.reps << "\n";
  out << "seed = " << c.seed << "\n";
  out << "checkpoint = " << c.checkpoint << "\n";
  out << "rho_samples = " << c.rho_samples << "\n";
  out << "output = " << c.output << "\n";
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const std::string entry = trim(raw);
    if (entry.empty() || entry.front() == '#') {
      continue;
    }
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      fail(line, "expected 'key = value'");
    }
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (seen.count(key) != 0) {
      fail(line, "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
    }
    seen[key] = line;

    if (key == "id") {
      c.id = value;
    } else if (key == "description") {
      c.description = value;
    } else if (key == "problem") {
      const auto it = kProblems.find(value);
      if (it == kProblems.end()) {
        fail(line, "unknown problem '" + value + "'");
      }
      c.problem = it->second;
    } else if (key == "dim") {
      c.dim = parse_int<std::int64_t>(value, line, key);
    } else if (key == "eps") {
      c.eps = parse_double(value, line, key);
    } else if (key == "curvature") {
      c.curvature = parse_list(value, line, key);
    } else if (key == "centers") {
      c.centers = parse_list(value, line, key);
    } else if (key == "weights") {
      c.weights = parse_list(value, line, key);
    } else if (key == "noise") {
      c.noise = parse_list(value, line, key);
    } else if (key == "x0") {
      c.x0 = parse_list(value, line, key);
    } else if (key == "optimizer") {
      const auto it = kOptimizers.find(value);
      if (it == kOptimizers.end()) {
        fail(line, "unknown optimizer '" + value + "'");
      }
      c.optimizer = it->second;
    } else if (key == "schedule") {
      if (value == "constant") {
        c.schedule = StepSchedule::Kind::Constant;
      } else if (value == "inverse-sqrt") {
        c.schedule = StepSchedule::Kind::InverseSqrt;
      } else {
        fail(line, "unknown schedule '" + value + "'");
      }
    } else if (key == "gamma") {
      c.gamma = parse_double(value, line, key);
    } else if (key == "beta") {
      c.beta = parse_double(value, line, key);
    } else if (key == "iterations") {
      c.iterations = parse_int<std::int64_t>(value, line, key);
    } else if (key == "nodes") {
      c.nodes = parse_int<std::int64_t>(value, line, key);
    } else if (key == "minibatch") {
      c.minibatch = parse_int<std::int64_t>(value, line, key);
    } else if (key == "reps") {
      c.reps = parse_int<std::int64_t>(value, line, key);
    } else if (key == "seed") {
      c.seed = parse_int<std::uint64_t>(value, line, key);
    } else if (key == "checkpoint") {
      c.checkpoint = parse_int<std::int64_t>(value, line, key);
    } else if (key == "rho_samples") {
      c.rho_samples = parse_int<std::int64_t>(value, line, key);
    } else if (key == "output") {
      c.output = value;
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace signsgd
