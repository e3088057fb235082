#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "asgd/errors.hpp"
#include "asgd/theory/linalg.hpp"

namespace asgd::theory {

enum class ProblemKind { quadratic_toy, regression_toy };

/// Synthetic problem with curvature A = diag(eigenvalues), written in A's
/// eigenbasis.
///   quadratic_toy:  min_θ E (θ − x)ᵀ A (θ − x), x ~ N(0, I), θ* = 0
///   regression_toy: y = xᵀθ* + ε, x ~ N(0, A), ε ~ N(0, noise_variance), θ* = 1
struct SyntheticProblem {
  ProblemKind kind = ProblemKind::quadratic_toy;
  Vector eigenvalues;
  Vector theta_star;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return eigenvalues.size(); }
  double trace() const { return eigenvalues.sum(); }
  double lambda0() const { return eigenvalues.minCoeff(); }
  double lambda1() const { return eigenvalues.maxCoeff(); }
  Matrix A() const { return eigenvalues.asDiagonal(); }
};

inline SyntheticProblem make_quadratic_toy(std::uint64_t seed = 0) {
  SyntheticProblem p;
  p.kind = ProblemKind::quadratic_toy;
  p.eigenvalues = Vector::Constant(100, 0.02);
  p.eigenvalues.head(3).setConstant(1.0);
  p.theta_star = Vector::Zero(100);
  p.noise_variance = 0.0;
  p.seed = seed;
  return p;
}

inline SyntheticProblem make_regression_toy(std::uint64_t seed = 0) {
  SyntheticProblem p;
  p.kind = ProblemKind::regression_toy;
  p.eigenvalues = Vector::LinSpaced(100, 0.01, 1.0);
  p.theta_star = Vector::Ones(100);
  p.noise_variance = 1.0;
  p.seed = seed;
  return p;
}

/// E(θ) − E(θ*): θᵀAθ for the quadratic toy, ½(θ−θ*)ᵀA(θ−θ*) for regression.
inline double excess_risk(const SyntheticProblem& p, const Vector& theta) {
  if (theta.size() != p.dim()) throw structural_error("excess_risk: dimension mismatch");
  const Vector d = theta - p.theta_star;
  const double quad = d.dot(p.eigenvalues.cwiseProduct(d));
  return p.kind == ProblemKind::quadratic_toy ? quad : 0.5 * quad;
}

/// Draws x for the problem: N(0, I) for the quadratic toy, N(0, A) for
/// regression. With a finite max_sq_norm, draws with ‖x‖² above it are
/// rejected (the truncated sampler).
class FeatureSampler {
 public:
  explicit FeatureSampler(const SyntheticProblem& p,
                          double max_sq_norm = std::numeric_limits<double>::infinity())
      : scale_(p.kind == ProblemKind::quadratic_toy ? Vector::Ones(p.dim()) : Vector(p.eigenvalues.cwiseSqrt())),
        max_sq_norm_(max_sq_norm) {}

  void draw(Rng& rng, Vector& x) {
    do {
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = scale_(i) * normal_(rng);
      ++draws_;
    } while (x.squaredNorm() > max_sq_norm_ && ++rejections_);
  }

  Vector draw(Rng& rng) {
    Vector x(scale_.size());
    draw(rng, x);
    return x;
  }

  std::uint64_t draws() const noexcept { return draws_; }
  std::uint64_t rejections() const noexcept { return rejections_; }

 private:
  Vector scale_;
  double max_sq_norm_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t draws_ = 0;
  std::uint64_t rejections_ = 0;
};

struct RegressionDraw {
  Vector x;
  double y = 0.0;
};

inline RegressionDraw draw_regression(const SyntheticProblem& p, FeatureSampler& sampler, Rng& rng) {
  RegressionDraw d{sampler.draw(rng), 0.0};
  std::normal_distribution<double> noise(0.0, std::sqrt(p.noise_variance));
  d.y = d.x.dot(p.theta_star) + (p.noise_variance > 0.0 ? noise(rng) : 0.0);
  return d;
}

// ---------------------------------------------------------------------------
// Batch estimators

inline Vector batch_mean(std::span<const Vector> samples) {
  if (samples.empty()) throw contract_error("batch_mean of an empty sample");
  Vector sum = Vector::Zero(samples.front().size());
  for (const auto& x : samples) sum += x;
  return sum / static_cast<double>(samples.size());
}

/// Incremental Σ x xᵀ and Σ x y for the least-squares batch estimator.
class LeastSquaresAccumulator {
 public:
  explicit LeastSquaresAccumulator(Eigen::Index dim) : gram_(Matrix::Zero(dim, dim)), rhs_(Vector::Zero(dim)) {}

  void add(const Vector& x, double y) {
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(x);
    rhs_ += y * x;
    ++count_;
  }

  /// (Σ x xᵀ)⁻¹ Σ x y. A ridge of 1e-10·I is added when the Gram matrix's
  /// condition number exceeds 1e12.
  Vector solve() const {
    if (count_ == 0) throw contract_error("least squares of an empty sample");
    Matrix gram = gram_.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numeric_error("least squares: eigendecomposition failed");
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(gram.rows() - 1);
    if (!(lo > 0.0) || hi / lo > 1e12) gram.diagonal().array() += 1e-10;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw numeric_error("least squares: singular Gram matrix after regularization");
    Vector theta = llt.solve(rhs_);
    if (!theta.allFinite()) throw numeric_error("least squares: non-finite solution");
    return theta;
  }

  std::uint64_t count() const noexcept { return count_; }

 private:
  Matrix gram_;
  Vector rhs_;
  std::uint64_t count_ = 0;
};

inline Vector batch_least_squares(std::span<const RegressionDraw> samples) {
  if (samples.empty()) throw contract_error("least squares of an empty sample");
  LeastSquaresAccumulator acc(samples.front().x.size());
  for (const auto& s : samples) acc.add(s.x, s.y);
  return acc.solve();
}

}  // namespace asgd::theory
