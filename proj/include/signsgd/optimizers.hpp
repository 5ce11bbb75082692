#ifndef SIGNSGD_OPTIMIZERS_HPP
#define SIGNSGD_OPTIMIZERS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "signsgd/core.hpp"
#include "signsgd/problems.hpp"

namespace signsgd {

struct StepSchedule {
  enum class Kind { Constant, InverseSqrt };

  Kind kind = Kind::Constant;
  double gamma0 = 0.0;

  static StepSchedule constant(double gamma);
  /// gamma_k = gamma0 / sqrt(k + 1).
  static StepSchedule inverse_sqrt(double gamma0);

  double at(std::int64_t k) const;
  std::string describe() const;
};

enum class SignOperator { Stochastic, Deterministic };

struct SsdmConfig {
  std::int64_t iterations = 1;
  double beta = 0.0;
  double gamma = 1.0;
  /// Deterministic replaces the stochastic sign by sign(); used to compare
  /// against plain signSGD.
  SignOperator sign_operator = SignOperator::Stochastic;

  /// beta = 1 - 1/sqrt(K), gamma = K^(-3/4).
  static SsdmConfig defaults(std::int64_t iterations);
  void validate() const;
};

struct RunRow {
  std::int64_t k = 0;
  double gamma = 0.0;
  double f = 0.0;
  double g_l1 = 0.0;
  double g_l2 = 0.0;
  double rho_norm_hat = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t bits_up = 0;  // cumulative after k iterations
  std::uint64_t bits_down = 0;
};

/// Called at checkpoint rows; the return value fills rho_norm_hat.
using CheckpointProbe = std::function<double(const Vector& x, std::int64_t k)>;

struct RunOptions {
  /// 0 selects max(1, K / 100).
  std::int64_t checkpoint_stride = 0;
  bool keep_iterates = false;
  CheckpointProbe probe;
};

/// Transcript of one run: K + 1 rows (row k describes x_k), the points at
/// checkpoints, and optionally every iterate.
struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_stride = 1;
  std::vector<RunRow> rows;
  std::vector<std::int64_t> checkpoint_steps;
  std::vector<Vector> checkpoint_points;
  std::vector<Vector> iterates;
  Vector final_point;

  bool is_checkpoint(std::int64_t k) const;
};

std::int64_t resolve_checkpoint_stride(std::int64_t requested, std::int64_t iterations);

/// Bits per coordinate for broadcasting an integer in [-M, M].
int vote_sum_bits(int nodes);

// ---------------------------------------------------------------------------
// Single steps.

/// x - gamma sign(ghat).
Vector signsgd_step(const Vector& x, const StochasticOracle& oracle, double gamma, RandomSource& rng);

/// argmin{f(x), f(x - gamma sign(ghat))}; on a tie x is kept.
Vector signsgd_step_monotone(const Vector& x, const StochasticOracle& oracle,
                             const SmoothObjective& objective, double gamma, RandomSource& rng);

// ---------------------------------------------------------------------------
// Full runs. Node n draws from RandomSource::derive(seed, n); single-node
// methods use stream 0.

enum class SignSgdOption { Plain, Monotone };

RunRecord run_signsgd(const SmoothObjective& objective, const StochasticOracle& oracle,
                      SignSgdOption option, const StepSchedule& schedule, std::int64_t iterations,
                      const Vector& x0, std::uint64_t seed, const RunOptions& options = {});

/// Parameter-server majority vote with one oracle per node.
RunRecord run_parallel_majority_vote(const SmoothObjective& objective,
                                     std::span<const StochasticOracle> node_oracles,
                                     const StepSchedule& schedule, std::int64_t iterations,
                                     const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options = {});

/// Shared-data majority vote: M nodes querying the same oracle.
RunRecord run_parallel_majority_vote(const SmoothObjective& objective, const StochasticOracle& oracle,
                                     int nodes, const StepSchedule& schedule, std::int64_t iterations,
                                     const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options = {});

RunRecord run_parallel_majority_vote(const PartitionedProblem& problem, const StepSchedule& schedule,
                                     std::int64_t iterations, const Vector& x0, std::uint64_t seed,
                                     const RunOptions& options = {});

/// Stochastic sign descent with per-node momentum; the server sums the
/// node signs and broadcasts the sum.
RunRecord run_ssdm(const PartitionedProblem& problem, const SsdmConfig& config, const Vector& x0,
                   std::uint64_t seed, const RunOptions& options = {});

/// Plain SGD baseline, 32-bit floats on the wire in both directions.
RunRecord run_sgd(const SmoothObjective& objective, const StochasticOracle& oracle,
                  const StepSchedule& schedule, std::int64_t iterations, const Vector& x0,
                  std::uint64_t seed, const RunOptions& options = {});

/// Single-node view of an objective and oracle, for running SSDM on it.
PartitionedProblem single_node(const StochasticOracle& oracle, double sigma = 0.0);

}  // namespace signsgd

#endif  // SIGNSGD_OPTIMIZERS_HPP
