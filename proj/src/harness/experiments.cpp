#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

#include "signsgd/harness.hpp"
#include "signsgd/probes.hpp"

namespace signsgd {
namespace {

Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector broadcast(const std::vector<double>& values, Eigen::Index dim) {
  if (values.empty()) {
    return Vector::Zero(dim);
  }
  if (values.size() == 1) {
    return Vector::Constant(dim, values.front());
  }
  return to_vector(values);
}

// Unbiased oracle for the node average: mean of one draw per node.
StochasticOracle average_oracle(const PartitionedProblem& problem) {
  std::vector<StochasticOracle> parts;
  for (const auto& n : problem.nodes) {
    parts.push_back(n.oracle);
  }
  auto sampler = [parts](const Vector& x, RandomSource& rng) -> Vector {
    Vector total = parts.front().sample(x, rng);
    for (std::size_t n = 1; n < parts.size(); ++n) {
      total += parts[n].sample(x, rng);
    }
    return total / static_cast<double>(parts.size());
  };
  return StochasticOracle(problem.global, sampler, false, parts.front().minibatch_size());
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& config) {
  config.validate();
  const int tau = static_cast<int>(config.minibatch);
  switch (config.problem) {
    case ProblemKind::Rosenbrock: {
      const double nu = config.noise.empty() ? 0.0 : config.noise.front();
      StochasticOracle oracle = minibatch(rosenbrock_component_oracle(config.dim, nu), tau);
      Vector x0 = Vector::Ones(config.dim);
      x0(0) = -1.2;
      if (!config.x0.empty()) {
        x0 = to_vector(config.x0);
      }
      return {oracle.objective_ptr(), oracle, std::nullopt, x0};
    }
    case ProblemKind::Counterexample: {
      auto instance = counterexample_problem(config.eps);
      Vector x0 = config.x0.empty() ? Vector::Ones(2) : to_vector(config.x0);
      return {instance.objective, minibatch(instance.oracle, tau), std::nullopt, x0};
    }
    case ProblemKind::Quadratic: {
      const Vector curvature = to_vector(config.curvature);
      auto instance = quadratic_problem(curvature, broadcast(config.noise, curvature.size()));
      Vector x0 = config.x0.empty() ? Vector::Ones(curvature.size()) : to_vector(config.x0);
      return {instance.objective, minibatch(instance.oracle, tau), std::nullopt, x0};
    }
    case ProblemKind::PartitionedQuadratic: {
      const Vector curvature = to_vector(config.curvature);
      const Eigen::Index dim = curvature.size();
      const Vector noise = broadcast(config.noise, dim);
      std::vector<NodeQuadraticSpec> specs;
      for (std::int64_t n = 0; n < config.nodes; ++n) {
        Vector center = Eigen::Map<const Vector>(config.centers.data() + n * dim, dim);
        specs.push_back({curvature, center, noise});
      }
      PartitionedProblem problem = partitioned_quadratics(specs);
      if (!config.weights.empty()) {
        problem = scale_nodes(problem, config.weights);
      }
      for (auto& node : problem.nodes) {
        node.oracle = minibatch(node.oracle, tau);
        node.sigma /= std::sqrt(static_cast<double>(tau));
      }
      StochasticOracle oracle = average_oracle(problem);
      Vector x0 = config.x0.empty() ? Vector::Zero(dim) : to_vector(config.x0);
      ObjectivePtr objective = problem.global;
      return {objective, oracle, std::move(problem), x0};
    }
  }
  throw ConfigError("unsupported problem");
}

RunRecord run_once(const ExperimentConfig& config, const BuiltProblem& problem, std::int64_t rep) {
  const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
  RunOptions options;
  options.checkpoint_stride = config.checkpoint;
  if (config.rho_samples > 0) {
    options.probe = make_rho_norm_probe(problem.oracle, config.rho_samples, seed);
  }
  const std::int64_t k = config.iterations;
  const auto& objective = *problem.objective;

  if (config.optimizer == OptimizerKind::Ssdm) {
    SsdmConfig ssdm = SsdmConfig::defaults(k);
    if (config.gamma) {
      ssdm.gamma = *config.gamma;
    }
    if (config.beta) {
      ssdm.beta = *config.beta;
    }
    const PartitionedProblem nodes = problem.partitioned ? *problem.partitioned : single_node(problem.oracle);
    return run_ssdm(nodes, ssdm, problem.x0, seed, options);
  }

  const StepSchedule schedule = config.schedule == StepSchedule::Kind::Constant
                                    ? StepSchedule::constant(*config.gamma)
                                    : StepSchedule::inverse_sqrt(*config.gamma);
  switch (config.optimizer) {
    case OptimizerKind::SignSgdPlain:
      return run_signsgd(objective, problem.oracle, SignSgdOption::Plain, schedule, k, problem.x0, seed, options);
    case OptimizerKind::SignSgdMonotone:
      return run_signsgd(objective, problem.oracle, SignSgdOption::Monotone, schedule, k, problem.x0, seed,
                         options);
    case OptimizerKind::MajorityVote:
      if (problem.partitioned) {
        return run_parallel_majority_vote(*problem.partitioned, schedule, k, problem.x0, seed, options);
      }
      return run_parallel_majority_vote(objective, problem.oracle, static_cast<int>(config.nodes), schedule, k,
                                        problem.x0, seed, options);
    case OptimizerKind::Sgd:
      return run_sgd(objective, problem.oracle, schedule, k, problem.x0, seed, options);
    case OptimizerKind::Ssdm:
      break;
  }
  throw ConfigError("unsupported optimizer");
}

ExperimentResult run_series(const ExperimentConfig& config, unsigned threads) {
  const BuiltProblem problem = build_problem(config);
  ExperimentResult result;
  result.config = config;
  result.runs.resize(static_cast<std::size_t>(config.reps));

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.reps));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::int64_t rep = next++; rep < config.reps; rep = next++) {
      try {
        result.runs[static_cast<std::size_t>(rep)] = run_once(config, problem, rep);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  result.summary = aggregate(result.runs);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                unsigned threads) {
  ExperimentResult result = run_series(config, threads);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  }
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("cannot write " + path.string());
    }
    return out;
  };
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto path = out_dir / (config.id + "_rep" + std::to_string(r) + ".csv");
    auto out = open(path);
    write_run_csv(out, config, result.runs[r], static_cast<std::int64_t>(r));
    result.files.push_back(path);
  }
  const auto path = out_dir / (config.id + "_aggregate.csv");
  auto out = open(path);
  write_aggregate_csv(out, config, result.summary);
  result.files.push_back(path);
  return result;
}

// ---------------------------------------------------------------------------
// Canned experiments. Settings not fixed by the reference runs (noise level,
// starting points, node data) are fixed here and echoed into every output.

namespace {

ExperimentConfig rosenbrock_base() {
  ExperimentConfig c;
  c.problem = ProblemKind::Rosenbrock;
  c.dim = 10;
  c.noise = {1.0};  // inferred: not stated with the figures
  c.iterations = 10000;
  c.reps = 10;
  c.seed = 1;
  return c;
}

std::vector<ExperimentConfig> majority_vote_series(StepSchedule::Kind schedule, const char* tag) {
  std::vector<ExperimentConfig> out;
  for (int m : {1, 3, 4, 15, 16}) {
    ExperimentConfig c = rosenbrock_base();
    c.id = "M" + std::to_string(m);
    c.description = std::string("majority vote, Rosenbrock d=10, ") + tag + ", tau=1, M=" + std::to_string(m);
    c.optimizer = OptimizerKind::MajorityVote;
    c.schedule = schedule;
    c.gamma = 0.02;
    c.nodes = m;
    out.push_back(c);
  }
  return out;
}

std::vector<ExperimentConfig> minibatch_series(StepSchedule::Kind schedule, std::vector<int> taus,
                                               const char* tag) {
  std::vector<ExperimentConfig> out;
  for (int tau : taus) {
    ExperimentConfig c = rosenbrock_base();
    c.id = "tau" + std::to_string(tau);
    c.description = std::string("signSGD option 1, Rosenbrock d=10, ") + tag + ", tau=" + std::to_string(tau);
    c.optimizer = OptimizerKind::SignSgdPlain;
    c.schedule = schedule;
    c.gamma = 0.25;
    c.minibatch = tau;
    c.rho_samples = 200;
    out.push_back(c);
  }
  return out;
}

std::vector<ExperimentConfig> counterexample_series() {
  ExperimentConfig sign;
  sign.id = "signsgd";
  sign.description = "signSGD option 1 on the sign trap, constant gamma=0.02, x0=(1,1)";
  sign.problem = ProblemKind::Counterexample;
  sign.eps = 0.5;
  sign.x0 = {1.0, 1.0};
  sign.optimizer = OptimizerKind::SignSgdPlain;
  sign.gamma = 0.02;
  sign.iterations = 1000;
  sign.reps = 10;
  sign.seed = 1;

  ExperimentConfig ssdm = sign;
  ssdm.id = "ssdm";
  ssdm.description = "single-node SSDM on the sign trap, default beta and gamma, K=20000";
  ssdm.optimizer = OptimizerKind::Ssdm;
  ssdm.gamma.reset();
  ssdm.iterations = 20000;
  return {sign, ssdm};
}

std::vector<ExperimentConfig> partitioned_series() {
  ExperimentConfig base;
  base.problem = ProblemKind::PartitionedQuadratic;
  base.curvature = std::vector<double>(10, 1.0);
  base.nodes = 3;
  for (double c : {2.0, -1.0, -0.5}) {
    base.centers.insert(base.centers.end(), 10, c);
  }
  base.weights = {10.0, 1.0, 1.0};
  base.noise = {0.5};
  base.iterations = 10000;
  base.reps = 10;
  base.seed = 1;

  ExperimentConfig vote = base;
  vote.id = "majority-vote";
  vote.description = "majority vote on weighted partitioned quadratics, gamma=0.01";
  vote.optimizer = OptimizerKind::MajorityVote;
  vote.gamma = 0.01;

  ExperimentConfig ssdm = base;
  ssdm.id = "ssdm";
  ssdm.description = "SSDM on weighted partitioned quadratics, default beta and gamma";
  ssdm.optimizer = OptimizerKind::Ssdm;

  ExperimentConfig sgd = base;
  sgd.id = "sgd";
  sgd.description = "SGD baseline on weighted partitioned quadratics, gamma=0.01";
  sgd.optimizer = OptimizerKind::Sgd;
  sgd.gamma = 0.01;
  return {vote, ssdm, sgd};
}

std::vector<ExperimentConfig> neighborhood_series() {
  std::vector<ExperimentConfig> out;
  for (double gamma : {0.25, 0.1, 0.05, 0.01}) {
    ExperimentConfig c = rosenbrock_base();
    c.id = "gamma" + format_number(gamma);
    c.description = "signSGD option 1, Rosenbrock d=10, tau=2, constant gamma=" + format_number(gamma);
    c.optimizer = OptimizerKind::SignSgdPlain;
    c.gamma = gamma;
    c.minibatch = 2;
    c.rho_samples = 200;
    out.push_back(c);
  }
  return out;
}

using TableWriter = std::function<std::vector<std::filesystem::path>(const std::filesystem::path&)>;

TableWriter table_file(const char* name, std::function<void(std::ostream&)> emit) {
  return [name, emit](const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("cannot write " + path.string());
    }
    emit(out);
    return std::vector<std::filesystem::path>{path};
  };
}

std::vector<CannedExperiment> make_registry() {
  std::vector<CannedExperiment> r;
  r.push_back({"counterexample", "sign trap: signSGD stays on the line x1+x2=2, SSDM escapes",
               counterexample_series(), nullptr});
  r.push_back({"majority-vote",
               "majority vote on Rosenbrock, constant gamma=0.02, M in {1,3,4,15,16}",
               majority_vote_series(StepSchedule::Kind::Constant, "constant gamma=0.02"), nullptr});
  r.push_back({"majority-vote-decay",
               "majority vote on Rosenbrock, gamma_k=0.02/sqrt(k+1), M in {1,3,4,15,16}",
               majority_vote_series(StepSchedule::Kind::InverseSqrt, "gamma_k=0.02/sqrt(k+1)"), nullptr});
  r.push_back({"fig3-const-lr", "signSGD on Rosenbrock, constant gamma=0.25, tau in {1,2,5,8}",
               minibatch_series(StepSchedule::Kind::Constant, {1, 2, 5, 8}, "constant gamma=0.25"), nullptr});
  r.push_back({"rosenbrock-noise-sweep", "same runs as fig3-const-lr",
               minibatch_series(StepSchedule::Kind::Constant, {1, 2, 5, 8}, "constant gamma=0.25"), nullptr});
  r.push_back({"fig4-variable-lr",
               "signSGD on Rosenbrock, gamma_k=0.25/sqrt(k+1), tau in {1,2,5,7}",
               minibatch_series(StepSchedule::Kind::InverseSqrt, {1, 2, 5, 7}, "gamma_k=0.25/sqrt(k+1)"),
               nullptr});
  r.push_back({"fig5-neighborhood", "neighborhood size under constant steps, tau=2, gamma in {0.25,0.1,0.05,0.01}",
               neighborhood_series(), nullptr});
  r.push_back({"ssdm-partitioned",
               "SSDM, majority vote and SGD on partitioned quadratics with node weights (10,1,1); "
               "only SGD reaches the weighted minimizer",
               partitioned_series(), nullptr});
  r.push_back({"ssdm-vs-majority-vote", "same runs as ssdm-partitioned", partitioned_series(), nullptr});
  r.push_back({"bound-validation", "Monte-Carlo check of the Gauss SPB bounds on a (|g|, sigma) grid", {},
               table_file("bound_validation.csv",
                          [](std::ostream& out) { emit_bound_validation(out, 100000, 1); })});
  r.push_back({"norm-table",
               "bound grids: SPB bounds, mini-batch thresholds, I(p;l,l), rho_M sandwich ratios", {},
               table_file("bound_tables.csv", [](std::ostream& out) { emit_bound_tables(out); })});
  return r;
}

}  // namespace

const std::vector<CannedExperiment>& canned_experiments() {
  static const std::vector<CannedExperiment> registry = make_registry();
  return registry;
}

const CannedExperiment& find_experiment(const std::string& id) {
  for (const auto& e : canned_experiments()) {
    if (e.id == id) {
      return e;
    }
  }
  std::string valid;
  for (const auto& e : canned_experiments()) {
    valid += (valid.empty() ? "" : ", ") + e.id;
  }
  throw ConfigError("unknown experiment id '" + id + "'; valid ids: " + valid);
}

void list_experiments(std::ostream& out) {
  std::size_t width = 0;
  for (const auto& e : canned_experiments()) {
    width = std::max(width, e.id.size());
  }
  for (const auto& e : canned_experiments()) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << e.id << e.description << "\n";
  }
}

}  // namespace signsgd
