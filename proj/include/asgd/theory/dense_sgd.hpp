#pragma once

#include <cstdint>
#include <utility>

#include "asgd/errors.hpp"
#include "asgd/schedule.hpp"
#include "asgd/theory/linalg.hpp"

namespace asgd::theory {

/// Dense SGD on a generic gradient oracle with the uniform average of
/// θ_{t0+1..t}. Reference implementation for the synthetic experiments.
class DenseAsgd {
 public:
  DenseAsgd(Vector theta0, Schedule schedule, std::uint64_t t0 = 0)
      : theta_(std::move(theta0)), bar_(theta_), schedule_(schedule), t0_(t0) {}

  /// grad(θ) -> gradient estimate at θ for the sample of this step.
  template <class Grad>
  void step(Grad&& grad) {
    const std::uint64_t t = t_ + 1;
    theta_ -= rate(schedule_, t) * grad(static_cast<const Vector&>(theta_));
    if (!theta_.allFinite()) throw divergence_error("dense SGD iterate not finite", t);
    if (t <= t0_)
      bar_ = theta_;
    else
      bar_ += (theta_ - bar_) / static_cast<double>(t - t0_);
    t_ = t;
  }

  const Vector& theta() const noexcept { return theta_; }
  /// Equals θ until averaging starts.
  const Vector& theta_bar() const noexcept { return bar_; }
  std::uint64_t t() const noexcept { return t_; }
  const Schedule& schedule() const noexcept { return schedule_; }

 private:
  Vector theta_;
  Vector bar_;
  Schedule schedule_;
  std::uint64_t t0_;
  std::uint64_t t_ = 0;
};

}  // namespace asgd::theory
