#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asgd/errors.hpp"

namespace asgd {

using DenseVector = std::vector<double>;

/// Anything indexable like a dense vector of doubles. The trainers are
/// templated on this so tests can substitute an instrumented container.
template <class V>
concept DenseVectorLike = requires(V v, const V cv, std::size_t i) {
  { cv.size() } -> std::convertible_to<std::size_t>;
  { v[i] } -> std::convertible_to<double>;
};

struct Feature {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// Sparse feature vector in canonical form: strictly increasing indices,
/// no stored zeros, every index below dim().
class SparseVector {
 public:
  SparseVector() = default;

  /// Builds the canonical form from arbitrary (index, value) pairs.
  /// Duplicate indices are summed, then zeros are dropped.
  explicit SparseVector(std::vector<Feature> entries, std::size_t dim)
      : entries_(std::move(entries)), dim_(dim) {
    canonicalize();
  }

  SparseVector(std::initializer_list<Feature> entries, std::size_t dim)
      : SparseVector(std::vector<Feature>(entries), dim) {}

  /// Canonical form with dim = max index + 1.
  static SparseVector from_pairs(std::vector<Feature> entries) {
    std::size_t dim = 0;
    for (const auto& f : entries) dim = std::max<std::size_t>(dim, f.index + std::size_t{1});
    return SparseVector(std::move(entries), dim);
  }

  std::span<const Feature> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Largest stored index + 1, or 0 for the empty vector.
  std::size_t extent() const noexcept {
    return entries_.empty() ? 0 : entries_.back().index + std::size_t{1};
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& f : entries_) s += f.value * f.value;
    return s;
  }

  /// Raises the declared dimensionality; existing entries stay valid.
  void grow_dim(std::size_t dim) { dim_ = std::max(dim_, dim); }

  /// Appends a feature past every stored index (used for the bias column).
  void push_back(Feature f) {
    if (!entries_.empty() && f.index <= entries_.back().index)
      throw structural_error("push_back index not past the last entry");
    if (f.value == 0.0) return;
    entries_.push_back(f);
    dim_ = std::max<std::size_t>(dim_, f.index + std::size_t{1});
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  void canonicalize() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Feature& a, const Feature& b) { return a.index < b.index; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries_.size();) {
      Feature acc = entries_[i++];
      while (i < entries_.size() && entries_[i].index == acc.index) acc.value += entries_[i++].value;
      if (acc.value != 0.0) entries_[out++] = acc;
    }
    entries_.resize(out);
    if (extent() > dim_)
      throw structural_error("feature index " + std::to_string(entries_.back().index) +
                             " out of range for dim " + std::to_string(dim_));
  }

  std::vector<Feature> entries_;
  std::size_t dim_ = 0;
};

struct Sample {
  SparseVector features;
  double label = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Dense weight vector θ of a linear model f(x) = θᵀx.
struct LinearModel {
  DenseVector weights;

  LinearModel() = default;
  explicit LinearModel(std::size_t dim) : weights(dim, 0.0) {}
  explicit LinearModel(DenseVector w) : weights(std::move(w)) {
    for (double v : weights)
      if (!std::isfinite(v)) throw numeric_error("non-finite model weight");
  }

  std::size_t dim() const noexcept { return weights.size(); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct MetricsRecord {
  std::uint64_t step = 0;
  double passes = 0.0;
  std::optional<double> test_error_rate;
  double test_cost = 0.0;
  std::optional<double> excess_risk;
  double elapsed_seconds = 0.0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

namespace detail {

template <class Vec>
void check_extent(const SparseVector& v, const Vec& w) {
  if (v.extent() > static_cast<std::size_t>(w.size()))
    throw structural_error("sparse index " + std::to_string(v.extent() - 1) +
                           " out of range for dense length " + std::to_string(w.size()));
}

}  // namespace detail

/// Σ value_i · w[index_i]; touches nnz(v) coordinates of w.
template <DenseVectorLike Vec>
double dot(const SparseVector& v, const Vec& w) {
  detail::check_extent(v, w);
  double s = 0.0;
  for (const auto& f : v.entries()) s += f.value * w[f.index];
  return s;
}

/// w[index_i] += scale · value_i for every stored entry of v.
template <DenseVectorLike Vec>
void axpy_sparse(double scale, const SparseVector& v, Vec& w) {
  if (!std::isfinite(scale)) throw numeric_error("axpy_sparse: non-finite scale");
  detail::check_extent(v, w);
  if (scale == 0.0) return;
  for (const auto& f : v.entries()) w[f.index] += scale * f.value;
}

}  // namespace asgd
