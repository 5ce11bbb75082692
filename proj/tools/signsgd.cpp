// Command-line front end: run configs or canned experiments, list the
// registry, write bound tables, probe success probabilities at a point.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "signsgd/harness.hpp"
#include "signsgd/probes.hpp"

namespace fs = std::filesystem;
using namespace signsgd;

namespace {

constexpr int kConfigExit = 1;
constexpr int kRuntimeExit = 2;

fs::path output_root(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) {
    return flag;
  }
  if (!from_config.empty()) {
    return from_config;
  }
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return "results";
}

void report(const ExperimentResult& result) {
  const auto& last = result.summary.back();
  std::cout << result.config.id << ": " << result.config.reps << " reps, final f = " << format_number(last.f_mean)
            << " +- " << format_number(last.f_std) << "\n";
  for (const auto& file : result.files) {
    std::cout << "  wrote " << file.string() << "\n";
  }
}

Vector parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(v)) {
      throw ConfigError("--point expects comma-separated finite numbers, got '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw ConfigError("--point is empty");
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

StochasticOracle probe_oracle(const std::string& problem, Eigen::Index dim, double noise, int tau) {
  if (problem == "rosenbrock") {
    if (dim < 2) {
      throw ConfigError("rosenbrock needs a point with at least 2 coordinates");
    }
    return minibatch(rosenbrock_component_oracle(dim, noise), tau);
  }
  if (problem == "counterexample") {
    if (dim != 2) {
      throw ConfigError("counterexample needs a 2-coordinate point");
    }
    return minibatch(counterexample_problem(0.5).oracle, tau);
  }
  if (problem == "quadratic") {
    return minibatch(quadratic_problem(Vector::Ones(dim), Vector::Constant(dim, noise)).oracle, tau);
  }
  throw ConfigError("unknown problem '" + problem + "'; valid: rosenbrock, counterexample, quadratic");
}

void print_probe(const ProbeReport& r) {
  std::cout << "# signsgd " << kVersion << "\n# samples = " << r.samples << ", z = " << format_number(r.z) << "\n";
  std::cout << "i,x,g,rho_hat,half_width,mean,variance,third_abs_central\n";
  for (Eigen::Index i = 0; i < r.point.size(); ++i) {
    const auto& m = r.moments[static_cast<std::size_t>(i)];
    std::cout << i << ',' << format_number(r.point(i)) << ',' << format_number(r.gradient(i)) << ','
              << format_number(r.rho.probs(i)) << ',' << format_number(r.rho.half_widths(i)) << ','
              << format_number(m.mean) << ',' << format_number(m.variance) << ','
              << format_number(m.third_central) << "\n";
  }
  std::cout << "\ni,bound,value,rho_hat,margin,holds\n";
  for (const auto& c : r.comparisons) {
    std::cout << c.coordinate << ',' << c.bound << ',' << format_number(c.value) << ','
              << format_number(c.empirical) << ',' << format_number(c.margin) << ',' << (c.holds ? 1 : 0)
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sign-based stochastic optimization experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a config file or a canned experiment");
  std::string config_file, canned_id, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  unsigned threads = 0;
  auto* file_opt = run->add_option("config", config_file, "experiment config file");
  auto* id_opt = run->add_option("--id", canned_id, "canned experiment id (see `list`)");
  file_opt->excludes(id_opt);
  run->add_option("--seed", seed, "base seed override");
  run->add_option("--reps", reps, "repetition count override")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, std::string("output directory (default: $") + kOutputDirEnv + " or ./results)");
  run->add_option("--threads", threads, "worker threads, 0 for all cores");

  auto* list = app.add_subcommand("list", "list canned experiments");

  auto* bounds = app.add_subcommand("bounds", "write the bound tables as CSV");
  std::string bounds_out;
  bounds->add_option("--out", bounds_out, "output file, - for stdout")->required();

  auto* probe = app.add_subcommand("probe", "estimate success probabilities and moments at a point");
  std::string probe_problem, probe_point_text;
  std::int64_t probe_samples = 0;
  double probe_noise = 1.0;
  int probe_tau = 1;
  std::uint64_t probe_seed = 0;
  probe->add_option("--id", probe_problem, "rosenbrock, counterexample or quadratic")->required();
  probe->add_option("--point", probe_point_text, "comma-separated coordinates")->required();
  probe->add_option("--samples", probe_samples, "oracle draws")->required()->check(CLI::Range(2, 1000000000));
  probe->add_option("--noise", probe_noise, "nu (rosenbrock) or sigma (quadratic)")->check(CLI::NonNegativeNumber);
  probe->add_option("--minibatch", probe_tau, "mini-batch size")->check(CLI::PositiveNumber);
  probe->add_option("--seed", probe_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) {
      if (config_file.empty() && canned_id.empty()) {
        throw ConfigError("run needs a config file or --id");
      }
      std::vector<ExperimentConfig> series;
      fs::path root;
      const CannedExperiment* canned = nullptr;
      if (!config_file.empty()) {
        series.push_back(load_config(config_file));
        root = output_root(out_dir, series.front().output);
      } else {
        canned = &find_experiment(canned_id);
        series = canned->series;
        root = output_root(out_dir, "") / canned->id;
      }
      for (auto& config : series) {
        if (seed) {
          config.seed = *seed;
        }
        if (reps) {
          config.reps = *reps;
        }
        config.validate();
      }
      for (const auto& config : series) {
        report(run_experiment(config, root, threads));
      }
      if (canned != nullptr && canned->tables) {
        for (const auto& file : canned->tables(root)) {
          std::cout << "wrote " << file.string() << "\n";
        }
      }
    } else if (*list) {
      list_experiments(std::cout);
    } else if (*bounds) {
      if (bounds_out == "-") {
        emit_bound_tables(std::cout);
      } else {
        std::ofstream out(bounds_out);
        if (!out) {
          throw std::runtime_error("cannot write " + bounds_out);
        }
        emit_bound_tables(out);
      }
    } else if (*probe) {
      const Vector x = parse_point(probe_point_text);
      const StochasticOracle oracle = probe_oracle(probe_problem, x.size(), probe_noise, probe_tau);
      RandomSource rng(probe_seed);
      print_probe(probe_point(oracle, x, probe_samples, rng));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
