#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "asgd/errors.hpp"
#include "asgd/losses.hpp"

namespace asgd {

/// Learning-rate schedule γ_t = γ0 (1 + a γ0 t)^(-c).
struct Schedule {
  double gamma0 = 1.0;
  double a = 0.0;
  double c = 1.0;

  /// Validated construction: γ0 > 0, a ≥ 0, 0 ≤ c ≤ 1.
  static Schedule make(double gamma0, double a, double c) {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
      throw contract_error("schedule: gamma0 must be finite and > 0");
    if (!(a >= 0.0) || !std::isfinite(a)) throw contract_error("schedule: a must be finite and >= 0");
    if (!(c >= 0.0 && c <= 1.0)) throw contract_error("schedule: c must lie in [0, 1]");
    return Schedule{gamma0, a, c};
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// "gamma0=<g> a=<a> c=<c>" with round-trip precision.
inline std::string to_string(const Schedule& s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "gamma0=%.17g a=%.17g c=%.17g", s.gamma0, s.a, s.c);
  return buf;
}

/// γ_t. The sample consumed at step t (1-based) uses rate(s, t).
inline double rate(const Schedule& s, std::uint64_t t) {
  if (s.a == 0.0 || s.c == 0.0) return s.gamma0;
  return s.gamma0 * std::pow(1.0 + s.a * s.gamma0 * static_cast<double>(t), -s.c);
}

struct unchecked_t {
  explicit unchecked_t() = default;
};
inline constexpr unchecked_t unchecked{};

/// Inputs of the finite-sample bound on t·E‖θ̄_t − θ*‖²_A.
struct BoundParams {
  double lambda0 = 1.0;          // smallest eigenvalue of A
  double lambda1 = 1.0;          // largest eigenvalue of A
  double trace_AinvS = 0.0;      // tr(A⁻¹S)
  double delta0_Ainv_sq = 0.0;   // ‖θ0 − θ*‖²_{A⁻¹}
  Schedule schedule;

  /// Name of the first violated hypothesis, or nullopt if admissible.
  std::optional<std::string> violation() const {
    if (!(lambda0 > 0.0)) return "lambda0 > 0";
    if (!(lambda1 >= lambda0)) return "lambda1 >= lambda0";
    if (!(trace_AinvS >= 0.0)) return "tr(A^-1 S) >= 0";
    if (!(delta0_Ainv_sq >= 0.0)) return "||theta0 - theta*||^2_{A^-1} >= 0";
    if (!(schedule.gamma0 * lambda1 <= 1.0)) return "gamma0 * lambda1 <= 1";
    if (!((2.0 * schedule.c - 1.0) * schedule.a < lambda0)) return "(2c - 1) * a < lambda0";
    return std::nullopt;
  }

  bool admissible() const { return !violation().has_value(); }

  void require_admissible() const {
    if (auto v = violation()) throw contract_error("inadmissible bound parameters: violates " + *v);
  }

  /// κ = 1 − max(0, 2c−1)·a/λ0; lies in (0, 1] for admissible parameters.
  double kappa() const {
    return 1.0 - std::max(0.0, 2.0 * schedule.c - 1.0) * schedule.a / lambda0;
  }

  /// Checked construction.
  static BoundParams make(double lambda0, double lambda1, double trace_AinvS,
                          double delta0_Ainv_sq, Schedule schedule) {
    BoundParams p{lambda0, lambda1, trace_AinvS, delta0_Ainv_sq, schedule};
    p.require_admissible();
    return p;
  }
};

inline double c0(const BoundParams& p, unchecked_t) {
  const Schedule& s = p.schedule;
  const double ac = s.a * s.c;
  if (ac == 0.0) return 0.0;
  return ac * (1.0 + ac * s.gamma0) / (p.lambda0 - std::max(0.0, 2.0 * s.c - 1.0) * s.a);
}

/// c0 = a c (1 + a c γ0) / (λ0 − max(0, 2c−1) a).
inline double c0(const BoundParams& p) {
  p.require_admissible();
  return c0(p, unchecked);
}

/// Upper bound on t·E‖θ̄_t − θ*‖²_A for the averaged linear
/// stochastic-approximation iterate. Requires c > 0 and t ≥ 1.
inline double theorem1_bound(const BoundParams& p, std::uint64_t t) {
  p.require_admissible();
  const Schedule& s = p.schedule;
  if (!(s.c > 0.0)) throw contract_error("theorem1_bound is defined only for c > 0");
  if (t == 0) throw contract_error("theorem1_bound requires t >= 1");
  const double k = c0(p);
  const double td = static_cast<double>(t);
  const double leading = p.trace_AinvS;
  const double transient =
      (2.0 * k + k * k) * std::pow(1.0 + s.a * s.gamma0 * td, s.c - 1.0) / s.c * p.trace_AinvS;
  const double initial = (1.0 + k) * (1.0 + k) / (s.gamma0 * s.gamma0 * td) * p.delta0_Ainv_sq;
  return leading + transient + initial;
}

/// γ0 = 1/M, a = λ0, and c = 2/3 for squared loss or 3/4 otherwise.
/// M bounds ‖x‖²; λ0 is (a lower bound on) the smallest curvature.
inline Schedule recommended_schedule(LossKind loss, double M, double lambda0) {
  if (!(M > 0.0) || !std::isfinite(M)) throw contract_error("recommended_schedule: M must be > 0");
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
    throw contract_error("recommended_schedule: lambda0 must be > 0");
  const double c = loss == LossKind::squared ? 2.0 / 3.0 : 3.0 / 4.0;
  return Schedule::make(1.0 / M, lambda0, c);
}

}  // namespace asgd
