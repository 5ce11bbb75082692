#include "signsgd/optimizers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace signsgd {

StepSchedule StepSchedule::constant(double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("StepSchedule: step size must be positive");
  }
  return {Kind::Constant, gamma};
}

StepSchedule StepSchedule::inverse_sqrt(double gamma0) {
  if (!(gamma0 > 0.0)) {
    throw std::invalid_argument("StepSchedule: step size must be positive");
  }
  return {Kind::InverseSqrt, gamma0};
}

double StepSchedule::at(std::int64_t k) const {
  if (kind == Kind::Constant) {
    return gamma0;
  }
  return gamma0 / std::sqrt(static_cast<double>(k) + 1.0);
}

std::string StepSchedule::describe() const {
  std::ostringstream out;
  out << (kind == Kind::Constant ? "constant(" : "inverse-sqrt(") << gamma0 << ")";
  return out.str();
}

SsdmConfig SsdmConfig::defaults(std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("SsdmConfig: iteration count must be positive");
  }
  const double k = static_cast<double>(iterations);
  SsdmConfig config;
  config.iterations = iterations;
  config.beta = 1.0 - 1.0 / std::sqrt(k);
  config.gamma = std::pow(k, -0.75);
  return config;
}

void SsdmConfig::validate() const {
  if (iterations < 1) {
    throw std::invalid_argument("SsdmConfig: iteration count must be positive");
  }
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("SsdmConfig: momentum must lie in [0, 1)");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("SsdmConfig: step size must be positive");
  }
}

bool RunRecord::is_checkpoint(std::int64_t k) const {
  const auto last = static_cast<std::int64_t>(rows.size()) - 1;
  return k % checkpoint_stride == 0 || k == last;
}

std::int64_t resolve_checkpoint_stride(std::int64_t requested, std::int64_t iterations) {
  if (requested > 0) {
    return requested;
  }
  return std::max<std::int64_t>(1, iterations / 100);
}

int vote_sum_bits(int nodes) {
  // ceil(log2(2M + 1))
  const auto levels = static_cast<unsigned>(2 * nodes + 1);
  return static_cast<int>(std::bit_width(levels - 1));
}

namespace {

void require_iterations(std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("run: iteration count must be positive");
  }
}

void require_start(const SmoothObjective& objective, const Vector& x0) {
  if (x0.size() != objective.dim()) {
    throw std::invalid_argument("run: starting point has wrong dimension");
  }
  require_finite(x0, "run");
}

// Accumulates rows, checkpoints and bit counters for one run.
class Recorder {
public:
  Recorder(std::string method, const SmoothObjective& objective, std::int64_t iterations,
           std::uint64_t seed, const RunOptions& options)
      : objective_(objective), options_(options) {
    record_.method = std::move(method);
    record_.seed = seed;
    record_.checkpoint_stride = resolve_checkpoint_stride(options.checkpoint_stride, iterations);
    record_.rows.reserve(static_cast<std::size_t>(iterations) + 1);
    last_ = iterations;
  }

  void add_bits(std::uint64_t up, std::uint64_t down) {
    bits_up_ += up;
    bits_down_ += down;
  }

  void observe(std::int64_t k, const Vector& x, double gamma) {
    RunRow row;
    row.k = k;
    row.gamma = gamma;
    row.f = objective_.value(x);
    const Vector g = objective_.gradient(x);
    row.g_l1 = g.lpNorm<1>();
    row.g_l2 = g.norm();
    row.bits_up = bits_up_;
    row.bits_down = bits_down_;
    const bool checkpoint = k % record_.checkpoint_stride == 0 || k == last_;
    if (checkpoint) {
      record_.checkpoint_steps.push_back(k);
      record_.checkpoint_points.push_back(x);
      if (options_.probe) {
        row.rho_norm_hat = options_.probe(x, k);
      }
    }
    if (options_.keep_iterates) {
      record_.iterates.push_back(x);
    }
    record_.rows.push_back(row);
  }

  RunRecord finish(const Vector& x) {
    record_.final_point = x;
    return std::move(record_);
  }

private:
  const SmoothObjective& objective_;
  const RunOptions& options_;
  RunRecord record_;
  std::int64_t last_ = 0;
  std::uint64_t bits_up_ = 0;
  std::uint64_t bits_down_ = 0;
};

std::uint64_t as_bits(Eigen::Index dim) { return static_cast<std::uint64_t>(dim); }

}  // namespace

Vector signsgd_step(const Vector& x, const StochasticOracle& oracle, double gamma, RandomSource& rng) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("signsgd_step: step size must be positive");
  }
  return x - gamma * to_dense(sign(oracle.sample(x, rng)));
}

Vector signsgd_step_monotone(const Vector& x, const StochasticOracle& oracle,
                             const SmoothObjective& objective, double gamma, RandomSource& rng) {
  Vector candidate = signsgd_step(x, oracle, gamma, rng);
  if (objective.value(candidate) < objective.value(x)) {
    return candidate;
  }
  return x;
}

RunRecord run_signsgd(const SmoothObjective& objective, const StochasticOracle& oracle,
                      SignSgdOption option, const StepSchedule& schedule, std::int64_t iterations,
                      const Vector& x0, std::uint64_t seed, const RunOptions& options) {
  require_iterations(iterations);
  require_start(objective, x0);
  const char* method = option == SignSgdOption::Plain ? "signsgd-opt1" : "signsgd-opt2";
  Recorder recorder(method, objective, iterations, seed, options);
  RandomSource rng = RandomSource::derive(seed, 0);
  const std::uint64_t d = as_bits(objective.dim());

  Vector x = x0;
  double fx = objective.value(x);
  for (std::int64_t k = 0; k < iterations; ++k) {
    const double gamma = schedule.at(k);
    recorder.observe(k, x, gamma);
    Vector candidate = signsgd_step(x, oracle, gamma, rng);
    if (option == SignSgdOption::Plain) {
      x = std::move(candidate);
    } else {
      const double fc = objective.value(candidate);
      if (fc < fx) {
        x = std::move(candidate);
        fx = fc;
      }
    }
    recorder.add_bits(d, d);
  }
  recorder.observe(iterations, x, schedule.at(iterations));
  return recorder.finish(x);
}

RunRecord run_parallel_majority_vote(const SmoothObjective& objective,
                                     std::span<const StochasticOracle> node_oracles,
                                     const StepSchedule& schedule, std::int64_t iterations,
                                     const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options) {
  require_iterations(iterations);
  require_start(objective, x0);
  if (node_oracles.empty()) {
    throw std::invalid_argument("run_parallel_majority_vote: need at least one node");
  }
  const auto nodes = node_oracles.size();
  Recorder recorder("majority-vote", objective, iterations, seed, options);
  std::vector<RandomSource> streams;
  streams.reserve(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    streams.push_back(RandomSource::derive(seed, n));
  }
  const std::uint64_t traffic = nodes * as_bits(objective.dim());

  Vector x = x0;
  std::vector<SignVector> votes(nodes);
  for (std::int64_t k = 0; k < iterations; ++k) {
    const double gamma = schedule.at(k);
    recorder.observe(k, x, gamma);
    for (std::size_t n = 0; n < nodes; ++n) {
      votes[n] = sign(node_oracles[n].sample(x, streams[n]));
    }
    x -= gamma * to_dense(majority_vote(votes));
    recorder.add_bits(traffic, traffic);
  }
  recorder.observe(iterations, x, schedule.at(iterations));
  return recorder.finish(x);
}

RunRecord run_parallel_majority_vote(const SmoothObjective& objective, const StochasticOracle& oracle,
                                     int nodes, const StepSchedule& schedule, std::int64_t iterations,
                                     const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options) {
  if (nodes < 1) {
    throw std::invalid_argument("run_parallel_majority_vote: need at least one node");
  }
  const std::vector<StochasticOracle> shared(static_cast<std::size_t>(nodes), oracle);
  return run_parallel_majority_vote(objective, shared, schedule, iterations, x0, seed, options);
}

RunRecord run_parallel_majority_vote(const PartitionedProblem& problem, const StepSchedule& schedule,
                                     std::int64_t iterations, const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options) {
  std::vector<StochasticOracle> oracles;
  oracles.reserve(problem.nodes.size());
  for (const auto& n : problem.nodes) {
    oracles.push_back(n.oracle);
  }
  return run_parallel_majority_vote(*problem.global, oracles, schedule, iterations, x0, seed, options);
}

RunRecord run_ssdm(const PartitionedProblem& problem, const SsdmConfig& config, const Vector& x0,
                   std::uint64_t seed, const RunOptions& options) {
  config.validate();
  if (problem.nodes.empty()) {
    throw std::invalid_argument("run_ssdm: need at least one node");
  }
  const SmoothObjective& objective = *problem.global;
  require_start(objective, x0);
  const std::int64_t iterations = config.iterations;
  const std::size_t nodes = problem.nodes.size();
  const int m = static_cast<int>(nodes);
  Recorder recorder("ssdm", objective, iterations, seed, options);
  std::vector<RandomSource> streams;
  streams.reserve(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    streams.push_back(RandomSource::derive(seed, n));
  }
  const std::uint64_t d = as_bits(objective.dim());
  const std::uint64_t up = nodes * d;
  const std::uint64_t down = nodes * d * static_cast<std::uint64_t>(vote_sum_bits(m));
  const double step = config.gamma / static_cast<double>(m);

  Vector x = x0;
  std::vector<Vector> momentum(nodes);
  std::vector<SignVector> node_signs(nodes);
  for (std::int64_t k = 0; k < iterations; ++k) {
    recorder.observe(k, x, config.gamma);
    for (std::size_t n = 0; n < nodes; ++n) {
      Vector g = problem.nodes[n].oracle.sample(x, streams[n]);
      if (k == 0) {
        // m_{-1} = ghat_0, hence m_0 = ghat_0.
        momentum[n] = std::move(g);
      } else {
        momentum[n] = config.beta * momentum[n] + (1.0 - config.beta) * g;
      }
      node_signs[n] = config.sign_operator == SignOperator::Stochastic
                          ? stochastic_sign(momentum[n], streams[n])
                          : sign(momentum[n]);
    }
    const VectorX<int> vote_sum = sum_votes(node_signs);
    x -= step * vote_sum.cast<double>();
    recorder.add_bits(up, down);
  }
  recorder.observe(iterations, x, config.gamma);
  return recorder.finish(x);
}

RunRecord run_sgd(const SmoothObjective& objective, const StochasticOracle& oracle,
                  const StepSchedule& schedule, std::int64_t iterations, const Vector& x0,
                  std::uint64_t seed, const RunOptions& options) {
  require_iterations(iterations);
  require_start(objective, x0);
  Recorder recorder("sgd", objective, iterations, seed, options);
  RandomSource rng = RandomSource::derive(seed, 0);
  const std::uint64_t traffic = 32 * as_bits(objective.dim());

  Vector x = x0;
  for (std::int64_t k = 0; k < iterations; ++k) {
    const double gamma = schedule.at(k);
    recorder.observe(k, x, gamma);
    x -= gamma * oracle.sample(x, rng);
    recorder.add_bits(traffic, traffic);
  }
  recorder.observe(iterations, x, schedule.at(iterations));
  return recorder.finish(x);
}

PartitionedProblem single_node(const StochasticOracle& oracle, double sigma) {
  PartitionedProblem problem;
  const auto& objective = oracle.objective_ptr();
  problem.nodes.push_back(
      PartitionedNode{objective, oracle, sigma, objective->coordinate_smoothness().maxCoeff()});
  problem.global = objective;
  return problem;
}

}  // namespace signsgd
