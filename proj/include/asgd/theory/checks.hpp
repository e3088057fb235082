#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "asgd/errors.hpp"
#include "asgd/parallel.hpp"
#include "asgd/stats.hpp"
#include "asgd/theory/linalg.hpp"
#include "asgd/theory/synthetic.hpp"

namespace asgd::theory {

// ---------------------------------------------------------------------------
// Divergence above γ = 2/M

enum class DivergenceOutcome { diverged, bounded };

struct DivergenceResult {
  DivergenceOutcome outcome = DivergenceOutcome::bounded;
  std::uint64_t steps_run = 0;
  double final_norm = 0.0;
  double max_norm = 0.0;
};

struct DivergenceSetup {
  double M = 1.0;
  double gamma = 0.0;
  std::uint64_t steps = 100000;
  std::uint64_t seed = 0;
  Eigen::Index dim = 10;
  double noise_sd = 1.0;
  double threshold = 1e6;
};

/// Constant-rate least squares on x drawn uniformly from the sphere of
/// radius √M, y = xᵀθ* + ε with θ* = 1 and θ0 = 0. Stops early once ‖θ‖
/// exceeds the threshold.
inline DivergenceResult divergence_check(const DivergenceSetup& s) {
  if (!(s.M > 0.0)) throw contract_error("divergence_check requires M > 0");
  if (!(s.gamma >= 0.0)) throw contract_error("divergence_check requires gamma >= 0");
  if (s.dim < 1) throw contract_error("divergence_check requires dim >= 1");
  Rng rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector theta_star = Vector::Ones(s.dim);
  Vector theta = Vector::Zero(s.dim);
  Vector x(s.dim);
  const double radius = std::sqrt(s.M);
  DivergenceResult r;
  for (std::uint64_t t = 1; t <= s.steps; ++t) {
    for (Eigen::Index i = 0; i < s.dim; ++i) x(i) = normal(rng);
    x *= radius / x.norm();
    const double y = x.dot(theta_star) + s.noise_sd * normal(rng);
    theta -= s.gamma * (x.dot(theta) - y) * x;
    const double n = theta.norm();
    r.steps_run = t;
    r.final_norm = n;
    if (!(n <= r.max_norm)) r.max_norm = std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
    if (!(n <= s.threshold)) {
      r.outcome = DivergenceOutcome::diverged;
      break;
    }
  }
  return r;
}

inline DivergenceResult divergence_check(double M, double gamma, std::uint64_t steps, std::uint64_t seed) {
  DivergenceSetup s;
  s.M = M;
  s.gamma = gamma;
  s.steps = steps;
  s.seed = seed;
  return divergence_check(s);
}

// ---------------------------------------------------------------------------
// Multiplicative noise term ξ^(2) = (x xᵀ − Σx)(θ − θ*) on the regression toy

struct Xi2Row {
  double estimate = 0.0;  // E‖ξ^(2)‖²_{A⁻¹}
  double std_error = 0.0;
  double bound = 0.0;     // (M/λ0)‖θ − θ*‖²_A
  double ratio = 0.0;     // estimate / bound, 0 when both vanish
  bool pass = false;
};

struct Xi2Report {
  double M = 0.0;
  double lambda0 = 0.0;
  std::uint64_t draws_per_theta = 0;
  std::uint64_t rejections = 0;
  std::vector<Xi2Row> rows;
  bool pass = false;
};

/// Default truncation radius: tr(A) plus ten standard deviations of ‖x‖²
/// under x ~ N(0, A), so the truncation almost never rejects.
inline double default_truncation(const SyntheticProblem& p) {
  return p.trace() + 10.0 * std::sqrt(2.0 * p.eigenvalues.squaredNorm());
}

/// Monte-Carlo check of E‖ξ^(2)‖²_{A⁻¹} ≤ (M/λ0)‖θ−θ*‖²_A with x drawn from
/// N(0, A) conditioned on ‖x‖² ≤ M. Σx = E x xᵀ is diagonal by sign symmetry;
/// it equals A unless the pilot sample sees rejections, in which case the
/// diagonal is estimated from the pilot.
inline Xi2Report xi2_bound_check(const SyntheticProblem& p, const std::vector<Vector>& thetas,
                                 std::uint64_t draws = 100000, std::uint64_t seed = 0,
                                 std::optional<double> M_override = std::nullopt, unsigned threads = 0) {
  if (p.kind != ProblemKind::regression_toy) throw contract_error("xi2_bound_check needs a regression problem");
  if (draws < 2) throw contract_error("xi2_bound_check needs at least 2 draws");
  const double M = M_override.value_or(default_truncation(p));
  if (!(M > 0.0)) throw contract_error("truncation M must be > 0");
  const Eigen::Index d = p.dim();
  for (const auto& th : thetas)
    if (th.size() != d) throw structural_error("xi2_bound_check: theta dimension mismatch");

  Xi2Report report;
  report.M = M;
  report.lambda0 = p.lambda0();
  report.draws_per_theta = draws;

  // Pilot for Σx.
  Vector sigma = p.eigenvalues;
  {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    FeatureSampler pilot(p, M);
    Vector x(d);
    Vector acc = Vector::Zero(d);
    const std::uint64_t n = std::max<std::uint64_t>(draws, 100000);
    for (std::uint64_t i = 0; i < n; ++i) {
      pilot.draw(rng, x);
      acc += x.cwiseAbs2();
    }
    if (pilot.rejections() > 0) sigma = acc / static_cast<double>(n);
    report.rejections = pilot.rejections();
  }
  const Vector a_inv = p.eigenvalues.cwiseInverse();

  report.rows.resize(thetas.size());
  parallel_for(
      thetas.size(),
      [&](std::size_t k) {
        Rng rng = replicate_rng(seed, k);
        FeatureSampler sampler(p, M);
        const Vector delta = thetas[k] - p.theta_star;
        const Vector sigma_delta = sigma.cwiseProduct(delta);
        Vector x(d);
        Vector xi(d);
        std::vector<double> values(draws);
        for (std::uint64_t i = 0; i < draws; ++i) {
          sampler.draw(rng, x);
          xi = x.dot(delta) * x - sigma_delta;
          values[i] = xi.cwiseAbs2().dot(a_inv);
        }
        const MeanStderr ms = mean_stderr(values);
        Xi2Row row;
        row.estimate = ms.mean;
        row.std_error = ms.std_error;
        row.bound = M / p.lambda0() * delta.dot(p.eigenvalues.cwiseProduct(delta));
        row.ratio = row.bound > 0.0 ? row.estimate / row.bound : 0.0;
        row.pass = row.estimate <= row.bound + 2.0 * row.std_error;
        report.rows[k] = row;
      },
      threads);

  report.pass = true;
  for (const auto& r : report.rows) report.pass = report.pass && r.pass;
  return report;
}

}  // namespace asgd::theory
