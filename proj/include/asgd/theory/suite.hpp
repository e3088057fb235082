#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "asgd/errors.hpp"
#include "asgd/schedule.hpp"
#include "asgd/theory/checks.hpp"
#include "asgd/theory/linalg.hpp"
#include "asgd/theory/linear_sa.hpp"
#include "asgd/theory/synthetic.hpp"
#include "asgd/theory/xbar.hpp"

namespace asgd::theory {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20090101;
  unsigned threads = 0;

  std::size_t theorem1_dim = 10;
  double theorem1_condition = 100.0;
  std::size_t theorem1_seeds = 200;
  std::vector<std::uint64_t> theorem1_checkpoints{100, 1000, 10000};
  double theorem1_noise_sd = 1.0;
  /// Replaces the recommended (γ0 = 1/λ1, a = λ0, c = 2/3) schedule.
  std::optional<Schedule> theorem1_schedule;

  std::size_t sandwich_cases = 20;
  std::size_t sandwich_max_dim = 8;
  std::uint64_t sandwich_max_t = 500;

  double divergence_M = 10.0;
  std::size_t divergence_seeds = 5;
  std::uint64_t divergence_steps = 100000;

  std::size_t xi2_thetas = 20;
  std::uint64_t xi2_draws = 100000;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

template <class Fn>
CheckResult timed(std::string name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r = fn();
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Eigenvalues log-uniform in [λ1/condition, λ1] with both ends attained.
inline Vector random_eigenvalues(Rng& rng, std::size_t d, double lambda1, double condition) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector ev(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) ev(i) = lambda1 * std::pow(condition, -u(rng));
  ev(0) = lambda1;
  if (d > 1) ev(1) = lambda1 / condition;
  return ev;
}

}  // namespace detail

/// Random SPD A with the requested condition number and λ1 = 1, S = σ²I,
/// θ* ~ N(0, I), b = Aθ*, θ0 = 0.
inline LinearSaConfig make_theorem1_case(const VerifyOptions& o) {
  Rng rng(o.seed);
  LinearSaConfig cfg;
  cfg.A = random_spd(rng, detail::random_eigenvalues(rng, o.theorem1_dim, 1.0, o.theorem1_condition));
  const Vector theta_star = standard_normal(rng, cfg.A.rows());
  cfg.b = cfg.A * theta_star;
  cfg.S = o.theorem1_noise_sd * o.theorem1_noise_sd * Matrix::Identity(cfg.A.rows(), cfg.A.rows());
  cfg.theta0 = Vector::Zero(cfg.A.rows());
  const Spectrum sp = spectrum(cfg.A);
  cfg.schedule = o.theorem1_schedule.value_or(Schedule::make(1.0 / sp.lambda1, sp.lambda0, 2.0 / 3.0));
  cfg.seed = o.seed;
  return cfg;
}

inline CheckResult check_theorem1(const VerifyOptions& o) {
  return detail::timed("theorem1_bound", [&] {
    const LinearSaConfig cfg = make_theorem1_case(o);
    const Theorem1Report rep = verify_theorem1(cfg, o.theorem1_seeds, o.theorem1_checkpoints, o.threads);
    CheckResult r;
    r.pass = rep.pass;
    r.details.push_back("schedule " + to_string(cfg.schedule) +
                        detail::fmt(" lambda0=%.6g lambda1=%.6g tr(A^-1 S)=%.6g", rep.params.lambda0,
                                    rep.params.lambda1, rep.params.trace_AinvS));
    for (const auto& row : rep.rows)
      r.details.push_back(detail::fmt("t=%.0f estimate=%.6g stderr=%.3g bound=%.6g", static_cast<double>(row.t),
                                      row.estimate, row.std_error, row.bound) +
                          (row.pass ? " ok" : " FAIL"));
    return r;
  });
}

struct SandwichCase {
  Matrix A;
  Schedule schedule;
  std::uint64_t j = 1;
  std::uint64_t t = 1;
};

/// Random admissible case: d ≤ max_dim, condition ≤ 100, γ0λ1 ≤ 1,
/// (2c−1)a < λ0, 1 ≤ j ≤ t ≤ max_t.
inline SandwichCase random_sandwich_case(Rng& rng, std::size_t max_dim, std::uint64_t max_t) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim_dist(1, max_dim);
  SandwichCase sc;
  const std::size_t d = dim_dist(rng);
  const double lambda1 = std::pow(10.0, 2.0 * u(rng) - 1.0);
  const double condition = std::pow(100.0, u(rng));
  sc.A = random_spd(rng, detail::random_eigenvalues(rng, d, lambda1, condition));
  const Spectrum sp = spectrum(sc.A);
  const double c = 0.05 + 0.95 * u(rng);
  const double gamma0 = (0.1 + 0.9 * u(rng)) / sp.lambda1;
  const double a = c > 0.5 ? 0.99 * u(rng) * sp.lambda0 / (2.0 * c - 1.0) : 2.0 * u(rng) * sp.lambda0;
  sc.schedule = Schedule::make(gamma0, a, c);
  sc.t = std::uniform_int_distribution<std::uint64_t>(1, max_t)(rng);
  sc.j = std::uniform_int_distribution<std::uint64_t>(1, sc.t)(rng);
  return sc;
}

inline CheckResult check_sandwich(const VerifyOptions& o) {
  return detail::timed("xbar_sandwich", [&] {
    CheckResult r;
    r.pass = true;
    Rng rng(o.seed ^ 0x5a5a5a5aULL);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.sandwich_cases; ++i) {
      const SandwichCase sc = random_sandwich_case(rng, o.sandwich_max_dim, o.sandwich_max_t);
      const SandwichResult res = psd_sandwich(sc.A, sc.schedule, sc.j, sc.t);
      worst = std::min({worst, res.lower_gap_min_eig, res.upper_gap_min_eig});
      if (!res.holds) {
        r.pass = false;
        r.details.push_back(detail::fmt("case %.0f FAIL: lower gap %.3g upper gap %.3g", static_cast<double>(i),
                                        res.lower_gap_min_eig, res.upper_gap_min_eig));
      }
    }
    r.details.push_back(detail::fmt("%.0f cases, smallest gap eigenvalue %.3g",
                                    static_cast<double>(o.sandwich_cases), worst));
    return r;
  });
}

inline CheckResult check_divergence(const VerifyOptions& o) {
  return detail::timed("divergence_threshold", [&] {
    CheckResult r;
    r.pass = true;
    for (std::size_t i = 0; i < o.divergence_seeds; ++i) {
      const std::uint64_t seed = o.seed ^ i;
      const auto hi = divergence_check(o.divergence_M, 2.4 / o.divergence_M, o.divergence_steps, seed);
      const auto lo = divergence_check(o.divergence_M, 0.5 / o.divergence_M, o.divergence_steps, seed);
      const bool ok = hi.outcome == DivergenceOutcome::diverged && lo.outcome == DivergenceOutcome::bounded &&
                      lo.max_norm < 1e3;
      r.pass = r.pass && ok;
      r.details.push_back(detail::fmt("seed %.0f: 2.4/M diverged after %.0f steps, 0.5/M max norm %.4g",
                                      static_cast<double>(i), static_cast<double>(hi.steps_run), lo.max_norm) +
                          (ok ? " ok" : " FAIL"));
    }
    return r;
  });
}

inline std::vector<Vector> random_thetas(const SyntheticProblem& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(p.theta_star + standard_normal(rng, p.dim()));
  return out;
}

inline CheckResult check_xi2(const VerifyOptions& o) {
  return detail::timed("xi2_bound", [&] {
    const SyntheticProblem p = make_regression_toy(o.seed);
    const Xi2Report rep = xi2_bound_check(p, random_thetas(p, o.xi2_thetas, o.seed), o.xi2_draws, o.seed,
                                          std::nullopt, o.threads);
    CheckResult r;
    r.pass = rep.pass;
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.ratio);
    r.details.push_back(detail::fmt("M=%.6g lambda0=%.6g rejections=%.0f, largest estimate/bound %.4g", rep.M,
                                    rep.lambda0, static_cast<double>(rep.rejections), worst));
    return r;
  });
}

/// Runs every theory check in order. Errors inside a check (for example an
/// inadmissible schedule) are reported as a failed check.
inline std::vector<CheckResult> run_verify_suite(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  using Fn = CheckResult (*)(const VerifyOptions&);
  const std::pair<const char*, Fn> checks[] = {{"theorem1_bound", check_theorem1},
                                               {"xbar_sandwich", check_sandwich},
                                               {"divergence_threshold", check_divergence},
                                               {"xi2_bound", check_xi2}};
  for (const auto& [name, fn] : checks) {
    try {
      out.push_back(fn(o));
    } catch (const error& e) {
      out.push_back(CheckResult{name, false, {std::string("error: ") + e.what()}, 0.0});
    }
  }
  return out;
}

}  // namespace asgd::theory
