#ifndef SIGNSGD_PROBLEMS_HPP
#define SIGNSGD_PROBLEMS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "signsgd/core.hpp"

namespace signsgd {

/// Differentiable objective with coordinate-wise smoothness constants L_i,
/// f(y) <= f(x) + <grad f(x), y - x> + sum_i L_i/2 (y_i - x_i)^2.
class SmoothObjective {
public:
  virtual ~SmoothObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual const Vector& coordinate_smoothness() const = 0;
  virtual std::optional<double> optimum_value() const { return std::nullopt; }
  virtual std::string name() const = 0;

  double mean_smoothness() const { return coordinate_smoothness().mean(); }
};

using ObjectivePtr = std::shared_ptr<const SmoothObjective>;

/// Stochastic gradient oracle. Stateless apart from the RandomSource the
/// caller passes in, so one oracle may be shared by any number of nodes.
class StochasticOracle {
public:
  using Sampler = std::function<Vector(const Vector&, RandomSource&)>;

  StochasticOracle(ObjectivePtr objective, Sampler sampler, bool bias_allowed = false,
                   int minibatch_size = 1);

  Vector sample(const Vector& x, RandomSource& rng) const;

  const SmoothObjective& objective() const { return *objective_; }
  const ObjectivePtr& objective_ptr() const { return objective_; }
  int minibatch_size() const noexcept { return minibatch_size_; }
  bool bias_allowed() const noexcept { return bias_allowed_; }

private:
  ObjectivePtr objective_;
  Sampler sampler_;
  bool bias_allowed_;
  int minibatch_size_;
};

struct ProblemInstance {
  ObjectivePtr objective;
  StochasticOracle oracle;
};

// ---------------------------------------------------------------------------

/// sum_{i=1}^{d-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
class Rosenbrock final : public SmoothObjective {
public:
  explicit Rosenbrock(Eigen::Index dim);

  Eigen::Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const Vector& coordinate_smoothness() const override { return smoothness_; }
  std::optional<double> optimum_value() const override { return 0.0; }
  std::string name() const override { return "rosenbrock"; }

  /// Number of summands, d - 1.
  Eigen::Index components() const { return dim_ - 1; }
  /// Gradient of summand `component` (0-based) as a full-length vector.
  Vector component_gradient(const Vector& x, Eigen::Index component) const;

  /// Half-width of the box [-b, b]^d over which the smoothness constants
  /// are estimated.
  static constexpr double kSmoothnessBox = 2.0;

private:
  Eigen::Index dim_;
  Vector smoothness_;
};

/// Separable quadratic (1/2) sum_i a_i (x_i - c_i)^2 + offset.
class Quadratic final : public SmoothObjective {
public:
  Quadratic(Vector curvature, Vector center, double offset = 0.0);

  Eigen::Index dim() const override { return curvature_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const Vector& coordinate_smoothness() const override { return curvature_; }
  std::optional<double> optimum_value() const override { return offset_; }
  std::string name() const override { return "quadratic"; }

  const Vector& curvature() const { return curvature_; }
  const Vector& center() const { return center_; }
  double offset() const { return offset_; }

private:
  Vector curvature_;
  Vector center_;
  double offset_;
};

/// (1/2) [<a_1, x>^2 + <a_2, x>^2] with a_1 = (1 + eps, -1 + eps) and
/// a_2 = (-1 + eps, 1 + eps).
class SignTrapObjective final : public SmoothObjective {
public:
  explicit SignTrapObjective(double eps);

  Eigen::Index dim() const override { return 2; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const Vector& coordinate_smoothness() const override { return smoothness_; }
  std::optional<double> optimum_value() const override { return 0.0; }
  std::string name() const override { return "counterexample"; }

  const Vector& direction(int which) const { return which == 0 ? a1_ : a2_; }
  double eps() const { return eps_; }

private:
  double eps_;
  Vector a1_;
  Vector a2_;
  Vector smoothness_;
};

/// (1/M) sum_n f_n.
class AverageObjective final : public SmoothObjective {
public:
  AverageObjective(std::vector<ObjectivePtr> parts, std::optional<double> optimum);

  Eigen::Index dim() const override { return parts_.front()->dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const Vector& coordinate_smoothness() const override { return smoothness_; }
  std::optional<double> optimum_value() const override { return optimum_; }
  std::string name() const override { return "average"; }

private:
  std::vector<ObjectivePtr> parts_;
  Vector smoothness_;
  std::optional<double> optimum_;
};

/// w * f for a positive scalar w.
class ScaledObjective final : public SmoothObjective {
public:
  ScaledObjective(ObjectivePtr inner, double weight);

  Eigen::Index dim() const override { return inner_->dim(); }
  double value(const Vector& x) const override { return weight_ * inner_->value(x); }
  Vector gradient(const Vector& x) const override { return weight_ * inner_->gradient(x); }
  const Vector& coordinate_smoothness() const override { return smoothness_; }
  std::optional<double> optimum_value() const override;
  std::string name() const override { return "scaled-" + inner_->name(); }

private:
  ObjectivePtr inner_;
  double weight_;
  Vector smoothness_;
};

// ---------------------------------------------------------------------------

struct PartitionedNode {
  ObjectivePtr objective;
  StochasticOracle oracle;
  double sigma;       // E||ghat^n - grad f_n||^2 <= sigma^2
  double smoothness;  // L^n
};

/// Data split across M nodes; the global objective is the node average.
struct PartitionedProblem {
  std::vector<PartitionedNode> nodes;
  ObjectivePtr global;

  int node_count() const { return static_cast<int>(nodes.size()); }
  double mean_sigma() const;
  double mean_smoothness() const;
  /// Analytic global minimizer when every node is a Quadratic.
  std::optional<Vector> minimizer() const;
};

struct NodeQuadraticSpec {
  Vector curvature;
  Vector center;
  Vector noise_sigma;
};

// ---------------------------------------------------------------------------

std::shared_ptr<const Rosenbrock> rosenbrock(Eigen::Index dim);

/// ghat(x) = grad f_i(x) + xi, i uniform over the d - 1 summands and
/// xi ~ N(0, nu^2 I). Biased: E ghat = grad f / (d - 1).
StochasticOracle rosenbrock_component_oracle(Eigen::Index dim, double nu);

/// Objective plus oracle sampling 2 <a_i, x> a_i for i in {1, 2}, each
/// with probability 1/2.
ProblemInstance counterexample_problem(double eps);

/// f(x) = (1/2) sum_i diag_i x_i^2 with an unbiased oracle adding
/// independent N(0, noise_sigma_i^2) noise per coordinate.
ProblemInstance quadratic_problem(const Vector& diag, const Vector& noise_sigma);

PartitionedProblem partitioned_quadratics(const std::vector<NodeQuadraticSpec>& specs);

/// Multiplies node n's objective, oracle, sigma and L^n by weights[n].
PartitionedProblem scale_nodes(const PartitionedProblem& problem, const std::vector<double>& weights);

/// Averages tau independent draws of the base oracle.
StochasticOracle minibatch(const StochasticOracle& oracle, int tau);

/// Noise-free oracle returning the true gradient.
StochasticOracle exact_oracle(ObjectivePtr objective);

}  // namespace signsgd

#endif  // SIGNSGD_PROBLEMS_HPP
