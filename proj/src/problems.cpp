#include "signsgd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace signsgd {

StochasticOracle::StochasticOracle(ObjectivePtr objective, Sampler sampler, bool bias_allowed,
                                   int minibatch_size)
    : objective_(std::move(objective)),
      sampler_(std::move(sampler)),
      bias_allowed_(bias_allowed),
      minibatch_size_(minibatch_size) {
  if (!objective_ || !sampler_) {
    throw std::invalid_argument("StochasticOracle: missing objective or sampler");
  }
  if (minibatch_size_ < 1) {
    throw std::invalid_argument("StochasticOracle: mini-batch size must be positive");
  }
}

Vector StochasticOracle::sample(const Vector& x, RandomSource& rng) const {
  Vector g = sampler_(x, rng);
  if (g.size() != objective_->dim()) {
    throw std::runtime_error("StochasticOracle: sample dimension mismatch");
  }
  if (!g.allFinite()) {
    throw std::runtime_error("StochasticOracle: non-finite sample");
  }
  return g;
}

// ---------------------------------------------------------------------------
// Rosenbrock

namespace {

// Largest absolute Hessian row sum of coordinate j over a grid on the box.
// A diagonal matrix of row sums dominates the Hessian (Gershgorin), so the
// coordinate-wise descent inequality holds for pairs inside the box.
double rosenbrock_row_bound(Eigen::Index j, Eigen::Index dim, double box) {
  constexpr int kSteps = 40;
  const bool has_next = j + 1 < dim;
  const bool has_prev = j > 0;
  double best = 0.0;
  for (int a = 0; a <= kSteps; ++a) {
    const double prev = has_prev ? -box + 2.0 * box * a / kSteps : 0.0;
    for (int b = 0; b <= kSteps; ++b) {
      const double cur = -box + 2.0 * box * b / kSteps;
      for (int c = 0; c <= kSteps; ++c) {
        const double next = has_next ? -box + 2.0 * box * c / kSteps : 0.0;
        double diag = has_prev ? 200.0 : 0.0;
        double off = has_prev ? 400.0 * std::abs(prev) : 0.0;
        if (has_next) {
          diag += 1200.0 * cur * cur - 400.0 * next + 2.0;
          off += 400.0 * std::abs(cur);
        }
        best = std::max(best, std::abs(diag) + off);
        if (!has_next) {
          break;
        }
      }
    }
    if (!has_prev) {
      break;
    }
  }
  return best;
}

}  // namespace

Rosenbrock::Rosenbrock(Eigen::Index dim) : dim_(dim), smoothness_(dim) {
  if (dim < 2) {
    throw std::invalid_argument("rosenbrock: dimension must be at least 2");
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    smoothness_(j) = rosenbrock_row_bound(j, dim, kSmoothnessBox);
  }
}

double Rosenbrock::value(const Vector& x) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double r = x(i + 1) - x(i) * x(i);
    const double s = 1.0 - x(i);
    total += 100.0 * r * r + s * s;
  }
  return total;
}

Vector Rosenbrock::gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim_);
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double r = x(i + 1) - x(i) * x(i);
    g(i) += -400.0 * x(i) * r - 2.0 * (1.0 - x(i));
    g(i + 1) += 200.0 * r;
  }
  return g;
}

Vector Rosenbrock::component_gradient(const Vector& x, Eigen::Index component) const {
  Vector g = Vector::Zero(dim_);
  const Eigen::Index i = component;
  const double r = x(i + 1) - x(i) * x(i);
  g(i) = -400.0 * x(i) * r - 2.0 * (1.0 - x(i));
  g(i + 1) = 200.0 * r;
  return g;
}

std::shared_ptr<const Rosenbrock> rosenbrock(Eigen::Index dim) {
  return std::make_shared<const Rosenbrock>(dim);
}

StochasticOracle rosenbrock_component_oracle(Eigen::Index dim, double nu) {
  if (nu < 0.0) {
    throw std::invalid_argument("rosenbrock_component_oracle: negative noise level");
  }
  auto objective = rosenbrock(dim);
  auto sampler = [objective, nu](const Vector& x, RandomSource& rng) {
    const auto component =
        static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::uint64_t>(objective->components() - 1)));
    Vector g = objective->component_gradient(x, component);
    if (nu > 0.0) {
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        g(j) += nu * rng.normal();
      }
    }
    return g;
  };
  return StochasticOracle(objective, sampler, /*bias_allowed=*/true);
}

// ---------------------------------------------------------------------------
// Quadratic

Quadratic::Quadratic(Vector curvature, Vector center, double offset)
    : curvature_(std::move(curvature)), center_(std::move(center)), offset_(offset) {
  if (curvature_.size() == 0 || curvature_.size() != center_.size()) {
    throw std::invalid_argument("quadratic: curvature and center dimensions differ");
  }
  if (!(curvature_.array() > 0.0).all()) {
    throw std::invalid_argument("quadratic: curvature entries must be positive");
  }
}

double Quadratic::value(const Vector& x) const {
  return 0.5 * (curvature_.array() * (x - center_).array().square()).sum() + offset_;
}

Vector Quadratic::gradient(const Vector& x) const {
  return (curvature_.array() * (x - center_).array()).matrix();
}

namespace {

StochasticOracle gaussian_oracle(ObjectivePtr objective, Vector noise_sigma) {
  if (noise_sigma.size() != objective->dim()) {
    throw std::invalid_argument("oracle: noise dimension mismatch");
  }
  if ((noise_sigma.array() < 0.0).any()) {
    throw std::invalid_argument("oracle: negative noise level");
  }
  const bool noiseless = (noise_sigma.array() == 0.0).all();
  auto sampler = [objective, noise_sigma, noiseless](const Vector& x, RandomSource& rng) {
    Vector g = objective->gradient(x);
    if (!noiseless) {
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        g(j) += noise_sigma(j) * rng.normal();
      }
    }
    return g;
  };
  return StochasticOracle(std::move(objective), sampler);
}

}  // namespace

ProblemInstance quadratic_problem(const Vector& diag, const Vector& noise_sigma) {
  if (diag.size() != noise_sigma.size()) {
    throw std::invalid_argument("quadratic_problem: dimension mismatch");
  }
  auto objective = std::make_shared<const Quadratic>(diag, Vector::Zero(diag.size()));
  return {objective, gaussian_oracle(objective, noise_sigma)};
}

// ---------------------------------------------------------------------------
// Counterexample

SignTrapObjective::SignTrapObjective(double eps) : eps_(eps), a1_(2), a2_(2), smoothness_(2) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("counterexample_problem: eps must lie in (0, 1)");
  }
  a1_ << 1.0 + eps, -1.0 + eps;
  a2_ << -1.0 + eps, 1.0 + eps;
  // Hessian a1 a1^T + a2 a2^T; absolute row sums give a dominating diagonal.
  const Eigen::Matrix2d hessian = a1_ * a1_.transpose() + a2_ * a2_.transpose();
  smoothness_ = hessian.cwiseAbs().rowwise().sum();
}

double SignTrapObjective::value(const Vector& x) const {
  const double p = a1_.dot(x);
  const double q = a2_.dot(x);
  return 0.5 * (p * p + q * q);
}

Vector SignTrapObjective::gradient(const Vector& x) const {
  return a1_.dot(x) * a1_ + a2_.dot(x) * a2_;
}

ProblemInstance counterexample_problem(double eps) {
  auto objective = std::make_shared<const SignTrapObjective>(eps);
  auto sampler = [objective](const Vector& x, RandomSource& rng) -> Vector {
    const Vector& a = objective->direction(rng.uniform() < 0.5 ? 0 : 1);
    return 2.0 * a.dot(x) * a;
  };
  return {objective, StochasticOracle(objective, sampler)};
}

// ---------------------------------------------------------------------------
// Averages, scaling and partitioned problems

AverageObjective::AverageObjective(std::vector<ObjectivePtr> parts, std::optional<double> optimum)
    : parts_(std::move(parts)), optimum_(optimum) {
  if (parts_.empty()) {
    throw std::invalid_argument("AverageObjective: no parts");
  }
  smoothness_ = Vector::Zero(parts_.front()->dim());
  for (const auto& p : parts_) {
    if (p->dim() != parts_.front()->dim()) {
      throw std::invalid_argument("AverageObjective: inconsistent dimensions");
    }
    smoothness_ += p->coordinate_smoothness();
  }
  smoothness_ /= static_cast<double>(parts_.size());
}

double AverageObjective::value(const Vector& x) const {
  double total = 0.0;
  for (const auto& p : parts_) {
    total += p->value(x);
  }
  return total / static_cast<double>(parts_.size());
}

Vector AverageObjective::gradient(const Vector& x) const {
  Vector total = Vector::Zero(dim());
  for (const auto& p : parts_) {
    total += p->gradient(x);
  }
  return total / static_cast<double>(parts_.size());
}

ScaledObjective::ScaledObjective(ObjectivePtr inner, double weight)
    : inner_(std::move(inner)), weight_(weight), smoothness_(weight * inner_->coordinate_smoothness()) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("ScaledObjective: weight must be positive");
  }
}

std::optional<double> ScaledObjective::optimum_value() const {
  if (auto v = inner_->optimum_value()) {
    return weight_ * *v;
  }
  return std::nullopt;
}

double PartitionedProblem::mean_sigma() const {
  double total = 0.0;
  for (const auto& n : nodes) {
    total += n.sigma;
  }
  return total / static_cast<double>(nodes.size());
}

double PartitionedProblem::mean_smoothness() const {
  double total = 0.0;
  for (const auto& n : nodes) {
    total += n.smoothness;
  }
  return total / static_cast<double>(nodes.size());
}

std::optional<Vector> PartitionedProblem::minimizer() const {
  if (nodes.empty()) {
    return std::nullopt;
  }
  const Eigen::Index dim = nodes.front().objective->dim();
  Vector weighted = Vector::Zero(dim);
  Vector total = Vector::Zero(dim);
  for (const auto& n : nodes) {
    const auto* q = dynamic_cast<const Quadratic*>(n.objective.get());
    if (q == nullptr) {
      return std::nullopt;
    }
    weighted += (q->curvature().array() * q->center().array()).matrix();
    total += q->curvature();
  }
  return (weighted.array() / total.array()).matrix();
}

namespace {

PartitionedProblem assemble(std::vector<PartitionedNode> nodes) {
  PartitionedProblem problem;
  problem.nodes = std::move(nodes);
  std::vector<ObjectivePtr> parts;
  parts.reserve(problem.nodes.size());
  for (const auto& n : problem.nodes) {
    parts.push_back(n.objective);
  }
  // Provisional global objective so minimizer() can see the parts.
  problem.global = std::make_shared<const AverageObjective>(parts, std::nullopt);
  std::optional<double> optimum;
  if (auto xstar = problem.minimizer()) {
    optimum = problem.global->value(*xstar);
  }
  problem.global = std::make_shared<const AverageObjective>(std::move(parts), optimum);
  return problem;
}

}  // namespace

PartitionedProblem partitioned_quadratics(const std::vector<NodeQuadraticSpec>& specs) {
  if (specs.empty()) {
    throw std::invalid_argument("partitioned_quadratics: need at least one node");
  }
  const Eigen::Index dim = specs.front().curvature.size();
  std::vector<PartitionedNode> nodes;
  for (const auto& spec : specs) {
    if (spec.curvature.size() != dim || spec.center.size() != dim || spec.noise_sigma.size() != dim) {
      throw std::invalid_argument("partitioned_quadratics: inconsistent dimensions");
    }
    auto objective = std::make_shared<const Quadratic>(spec.curvature, spec.center);
    nodes.push_back(PartitionedNode{objective, gaussian_oracle(objective, spec.noise_sigma),
                                    spec.noise_sigma.norm(), spec.curvature.maxCoeff()});
  }
  return assemble(std::move(nodes));
}

PartitionedProblem scale_nodes(const PartitionedProblem& problem, const std::vector<double>& weights) {
  if (weights.size() != problem.nodes.size()) {
    throw std::invalid_argument("scale_nodes: one weight per node required");
  }
  std::vector<PartitionedNode> nodes;
  for (std::size_t n = 0; n < weights.size(); ++n) {
    const double w = weights[n];
    if (!(w > 0.0)) {
      throw std::invalid_argument("scale_nodes: weights must be positive");
    }
    const auto& src = problem.nodes[n];
    ObjectivePtr objective;
    if (const auto* q = dynamic_cast<const Quadratic*>(src.objective.get())) {
      objective = std::make_shared<const Quadratic>(w * q->curvature(), q->center(), w * q->offset());
    } else {
      objective = std::make_shared<const ScaledObjective>(src.objective, w);
    }
    StochasticOracle base = src.oracle;
    auto sampler = [base, w](const Vector& x, RandomSource& rng) -> Vector {
      return w * base.sample(x, rng);
    };
    nodes.push_back(PartitionedNode{objective,
                                    StochasticOracle(objective, sampler, base.bias_allowed(),
                                                     base.minibatch_size()),
                                    w * src.sigma, w * src.smoothness});
  }
  return assemble(std::move(nodes));
}

StochasticOracle minibatch(const StochasticOracle& oracle, int tau) {
  if (tau < 1) {
    throw std::invalid_argument("minibatch: tau must be positive");
  }
  if (tau == 1) {
    return oracle;
  }
  auto sampler = [oracle, tau](const Vector& x, RandomSource& rng) -> Vector {
    Vector total = oracle.sample(x, rng);
    for (int t = 1; t < tau; ++t) {
      total += oracle.sample(x, rng);
    }
    return total / static_cast<double>(tau);
  };
  return StochasticOracle(oracle.objective_ptr(), sampler, oracle.bias_allowed(),
                          oracle.minibatch_size() * tau);
}

StochasticOracle exact_oracle(ObjectivePtr objective) {
  auto sampler = [objective](const Vector& x, RandomSource&) { return objective->gradient(x); };
  return StochasticOracle(objective, sampler);
}

}  // namespace signsgd
