#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "asgd/errors.hpp"

namespace asgd::theory {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Replicate i of an experiment seeded with `base` uses seed base ⊕ i.
inline Rng replicate_rng(std::uint64_t base, std::uint64_t i) { return Rng(base ^ i); }

struct Spectrum {
  double lambda0 = 0.0;  // smallest eigenvalue
  double lambda1 = 0.0;  // largest eigenvalue
};

inline void require_symmetric(const Matrix& A, const char* what) {
  if (A.rows() != A.cols()) throw structural_error(std::string(what) + " must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw contract_error(std::string(what) + " must be symmetric within 1e-12");
}

/// Exact extreme eigenvalues of a symmetric matrix.
inline Spectrum spectrum(const Matrix& A) {
  require_symmetric(A, "matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  return {es.eigenvalues()(0), es.eigenvalues()(A.rows() - 1)};
}

inline double min_eigenvalue(const Matrix& M) {
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  return es.eigenvalues()(0);
}

/// Symmetric square root of a positive semidefinite matrix.
inline Matrix psd_sqrt(const Matrix& S) {
  require_symmetric(S, "covariance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  Vector ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw contract_error("covariance must be positive semidefinite");
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Vector standard_normal(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
  return z;
}

/// Q diag(eigenvalues) Qᵀ with Q a Haar-random orthogonal matrix.
inline Matrix random_spd(Rng& rng, const Vector& eigenvalues) {
  const Eigen::Index d = eigenvalues.size();
  Matrix g(d, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Vector r = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j) < 0) q.col(j) = -q.col(j);
  Matrix A = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (A + A.transpose());
}

}  // namespace asgd::theory
