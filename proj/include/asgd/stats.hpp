#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace asgd {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error (sd / √n), summed in index order so the
/// result does not depend on how the values were produced.
inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  out.n = xs.size();
  if (xs.empty()) return out;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  out.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
    const double var = sq.value() / static_cast<double>(xs.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace asgd
