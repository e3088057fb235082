#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "asgd/errors.hpp"
#include "asgd/parallel.hpp"
#include "asgd/schedule.hpp"
#include "asgd/stats.hpp"
#include "asgd/theory/linalg.hpp"

namespace asgd::theory {

/// Draws one zero-mean noise vector into `out` (already sized).
using NoiseSampler = std::function<void(Rng&, Vector&)>;

inline NoiseSampler gaussian_noise(const Matrix& S) {
  Matrix root = psd_sqrt(S);
  return [root = std::move(root)](Rng& rng, Vector& out) {
    out.noalias() = root * standard_normal(rng, root.rows());
  };
}

/// θ_t = θ_{t−1} − γ_t (A θ_{t−1} − b + ξ_t) with E ξ_t = 0, Cov ξ_t = S.
struct LinearSaConfig {
  Matrix A;
  Vector b;
  /// Noise covariance; used for the bound and for the default sampler.
  Matrix S;
  /// Optional replacement sampler; must have covariance S.
  NoiseSampler noise;
  Vector theta0;
  Schedule schedule;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return A.rows(); }

  Vector theta_star() const { return A.ldlt().solve(b); }

  void validate() const {
    require_symmetric(A, "A");
    const auto d = A.rows();
    if (b.size() != d || theta0.size() != d || S.rows() != d || S.cols() != d)
      throw structural_error("linear SA config: dimension mismatch");
    if (!(spectrum(A).lambda0 > 0.0)) throw contract_error("A must be positive definite");
  }

  NoiseSampler sampler() const { return noise ? noise : gaussian_noise(S); }
};

/// Runs the recursion and the running mean θ̄_t of θ_1..θ_t, calling
/// observe(t, θ_t, θ̄_t) after every step.
template <class Observer>
void run_linear_sa(const LinearSaConfig& cfg, std::uint64_t steps, Rng& rng, Observer&& observe) {
  cfg.validate();
  if (steps == 0) throw contract_error("run_linear_sa requires steps >= 1");
  const NoiseSampler sample_noise = cfg.sampler();
  Vector theta = cfg.theta0;
  Vector bar = Vector::Zero(cfg.dim());
  Vector xi(cfg.dim());
  Vector grad(cfg.dim());
  for (std::uint64_t t = 1; t <= steps; ++t) {
    sample_noise(rng, xi);
    grad.noalias() = cfg.A * theta;
    grad += xi - cfg.b;
    theta -= rate(cfg.schedule, t) * grad;
    if (!theta.allFinite()) throw divergence_error("linear SA iterate not finite", t);
    bar += (theta - bar) / static_cast<double>(t);
    observe(t, theta, bar);
  }
}

struct SaPoint {
  Vector theta;
  Vector theta_bar;
};

inline std::vector<SaPoint> run_linear_sa(const LinearSaConfig& cfg, std::uint64_t steps) {
  std::vector<SaPoint> out;
  out.reserve(steps);
  Rng rng(cfg.seed);
  run_linear_sa(cfg, steps, rng, [&](std::uint64_t, const Vector& th, const Vector& bar) {
    out.push_back({th, bar});
  });
  return out;
}

/// BoundParams computed exactly from A, S, θ0 and the schedule.
inline BoundParams bound_params(const LinearSaConfig& cfg) {
  cfg.validate();
  const Spectrum sp = spectrum(cfg.A);
  const auto ldlt = cfg.A.ldlt();
  const double tr = ldlt.solve(cfg.S).trace();
  const Vector delta0 = cfg.theta0 - cfg.theta_star();
  const double d0 = delta0.dot(ldlt.solve(delta0));
  return BoundParams{sp.lambda0, sp.lambda1, std::max(0.0, tr), std::max(0.0, d0), cfg.schedule};
}

struct Theorem1Row {
  std::uint64_t t = 0;
  double estimate = 0.0;  // mean over replicates of t‖θ̄_t − θ*‖²_A
  double std_error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct Theorem1Report {
  BoundParams params;
  std::size_t replicates = 0;
  std::vector<Theorem1Row> rows;
  bool pass = false;
};

/// Monte-Carlo check of the finite-sample bound: at each checkpoint the
/// replicate mean minus two standard errors must not exceed the bound.
inline Theorem1Report verify_theorem1(const LinearSaConfig& cfg, std::size_t seeds,
                                      std::vector<std::uint64_t> checkpoints, unsigned threads = 0) {
  if (seeds == 0) throw contract_error("verify_theorem1 requires at least one seed");
  if (checkpoints.empty()) throw contract_error("verify_theorem1 requires checkpoints");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() == 0) throw contract_error("checkpoints must be >= 1");

  Theorem1Report report;
  report.params = bound_params(cfg);
  report.params.require_admissible();
  report.replicates = seeds;

  const Vector theta_star = cfg.theta_star();
  const std::uint64_t horizon = checkpoints.back();
  std::vector<std::vector<double>> values(checkpoints.size(), std::vector<double>(seeds));

  parallel_for(
      seeds,
      [&](std::size_t i) {
        Rng rng = replicate_rng(cfg.seed, i);
        std::size_t k = 0;
        run_linear_sa(cfg, horizon, rng, [&](std::uint64_t t, const Vector&, const Vector& bar) {
          if (k < checkpoints.size() && checkpoints[k] == t) {
            const Vector d = bar - theta_star;
            values[k][i] = static_cast<double>(t) * d.dot(cfg.A * d);
            ++k;
          }
        });
      },
      threads);

  report.pass = true;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const MeanStderr ms = mean_stderr(values[k]);
    Theorem1Row row;
    row.t = checkpoints[k];
    row.estimate = ms.mean;
    row.std_error = ms.std_error;
    row.bound = theorem1_bound(report.params, row.t);
    row.pass = row.estimate - 2.0 * row.std_error <= row.bound;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace asgd::theory
