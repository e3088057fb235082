#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "asgd/core.hpp"
#include "asgd/errors.hpp"

namespace asgd {

struct SparseClassificationSpec {
  std::size_t dim = 1000;
  std::size_t nnz = 20;
  std::size_t samples = 100000;
  /// Probability that a label is flipped.
  double label_noise = 0.05;
  std::uint64_t seed = 1;
};

/// Linearly separable data (before label noise): w* ~ N(0, I), x has `nnz`
/// distinct random coordinates with N(0, 1/nnz) values, y = sign(w*ᵀx).
/// The same seed always gives the same w*, so train and test files made
/// with different sample seeds share a teacher when `teacher_seed` matches.
inline std::vector<Sample> make_sparse_classification(const SparseClassificationSpec& spec,
                                                      std::uint64_t teacher_seed = 0) {
  if (spec.dim == 0 || spec.nnz == 0 || spec.nnz > spec.dim) throw contract_error("need 0 < nnz <= dim");
  if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) throw contract_error("label_noise must lie in [0, 0.5)");
  std::mt19937_64 teacher_rng(teacher_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(spec.dim);
  for (auto& v : w) v = normal(teacher_rng);

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(spec.dim - 1));
  std::bernoulli_distribution flip(spec.label_noise);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.nnz));
  std::vector<Sample> out;
  out.reserve(spec.samples);
  std::vector<std::uint32_t> idx;
  while (out.size() < spec.samples) {
    idx.clear();
    while (idx.size() < spec.nnz) {
      const std::uint32_t i = pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    std::vector<Feature> f;
    f.reserve(spec.nnz);
    double score = 0.0;
    for (auto i : idx) {
      const double v = scale * normal(rng);
      f.push_back({i, v});
      score += v * w[i];
    }
    if (score == 0.0) continue;
    double y = score > 0.0 ? 1.0 : -1.0;
    if (flip(rng)) y = -y;
    out.push_back(Sample{SparseVector(std::move(f), spec.dim), y});
  }
  return out;
}

}  // namespace asgd
