#pragma once

#include <cstdint>

#include "asgd/errors.hpp"
#include "asgd/schedule.hpp"
#include "asgd/theory/linalg.hpp"

namespace asgd::theory {

namespace detail {

inline void require_small(const Matrix& A) {
  require_symmetric(A, "A");
  if (A.rows() > 16) throw contract_error("xbar computations are limited to d <= 16");
}

inline BoundParams admissibility_params(const Matrix& A, const Schedule& s) {
  const Spectrum sp = spectrum(A);
  return BoundParams{sp.lambda0, sp.lambda1, 0.0, 0.0, s};
}

}  // namespace detail

/// X_j^t = Π_{i=j}^t (I − γ_i A); the identity when j > t.
inline Matrix x_product(const Matrix& A, const Schedule& s, std::uint64_t j, std::uint64_t t) {
  const auto d = A.rows();
  Matrix X = Matrix::Identity(d, d);
  for (std::uint64_t i = j; i <= t; ++i) X = X - rate(s, i) * (A * X);
  return X;
}

/// X̄_j^t = Σ_{i=j}^t γ_j X_{j+1}^i, accumulated term by term.
inline Matrix xbar_matrix(const Matrix& A, const Schedule& s, std::uint64_t j, std::uint64_t t) {
  detail::require_small(A);
  if (j > t) throw contract_error("xbar_matrix requires j <= t");
  if (!(s.gamma0 * spectrum(A).lambda1 <= 1.0)) throw contract_error("xbar_matrix requires gamma0 * lambda1 <= 1");
  const auto d = A.rows();
  const double gamma_j = rate(s, j);
  Matrix P = Matrix::Identity(d, d);  // X_{j+1}^i, starting from the empty product at i = j
  Matrix sum = gamma_j * P;
  for (std::uint64_t i = j + 1; i <= t; ++i) {
    P = P - rate(s, i) * (A * P);
    sum += gamma_j * P;
  }
  return sum;
}

/// Σ_{i=j}^t γ_i X_j^{i−1}, which telescopes to (I − X_j^t) A⁻¹.
inline Matrix telescoping_sum(const Matrix& A, const Schedule& s, std::uint64_t j, std::uint64_t t) {
  const auto d = A.rows();
  Matrix P = Matrix::Identity(d, d);  // X_j^{i-1}
  Matrix sum = Matrix::Zero(d, d);
  for (std::uint64_t i = j; i <= t; ++i) {
    sum += rate(s, i) * P;
    P = P - rate(s, i) * (A * P);
  }
  return sum;
}

struct SandwichResult {
  double lower_gap_min_eig = 0.0;  // λ_min(X̄ − (I − X) A⁻¹)
  double upper_gap_min_eig = 0.0;  // λ_min((1 + c0 (1 + a γ0 j)^(c−1)) A⁻¹ − X̄)
  bool holds = false;
};

/// (I − X_j^t) A⁻¹ ≤ X̄_j^t ≤ (1 + c0 (1 + a γ0 j)^(c−1)) A⁻¹ in the PSD order,
/// each side judged with tolerance 1e-10 on the smallest eigenvalue.
inline SandwichResult psd_sandwich(const Matrix& A, const Schedule& s, std::uint64_t j, std::uint64_t t) {
  detail::require_small(A);
  const BoundParams p = detail::admissibility_params(A, s);
  p.require_admissible();
  const auto d = A.rows();
  const Matrix A_inv = A.ldlt().solve(Matrix::Identity(d, d));
  const Matrix xbar = xbar_matrix(A, s, j, t);
  const Matrix lower = (Matrix::Identity(d, d) - x_product(A, s, j, t)) * A_inv;
  const double factor = 1.0 + c0(p) * std::pow(1.0 + s.a * s.gamma0 * static_cast<double>(j), s.c - 1.0);
  SandwichResult r;
  r.lower_gap_min_eig = min_eigenvalue(xbar - lower);
  r.upper_gap_min_eig = min_eigenvalue(factor * A_inv - xbar);
  r.holds = r.lower_gap_min_eig >= -1e-10 && r.upper_gap_min_eig >= -1e-10;
  return r;
}

inline bool psd_sandwich_check(const Matrix& A, const Schedule& s, std::uint64_t j, std::uint64_t t) {
  return psd_sandwich(A, s, j, t).holds;
}

}  // namespace asgd::theory
