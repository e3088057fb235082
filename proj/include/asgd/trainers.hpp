#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "asgd/core.hpp"
#include "asgd/errors.hpp"
#include "asgd/losses.hpp"
#include "asgd/schedule.hpp"

namespace asgd {

enum class Algorithm { sgd, asgd };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::sgd ? "sgd" : "asgd"; }

namespace detail {

inline double checked_shrink(double lambda, double gamma) {
  const double shrink = 1.0 - lambda * gamma;
  if (!(shrink > 0.0)) throw step_size_error("regularization shrink nonpositive (lambda * gamma >= 1)");
  return shrink;
}

template <class Vec>
Vec make_vector(std::size_t n, double value) {
  return Vec(n, value);
}

}  // namespace detail

/// Plain SGD with L2 shrink: θ_t = (1 − λγ_t) θ_{t−1} − γ_t L_s(θᵀx, y) x.
/// θ is stored as scale · w so the shrink costs O(1) per step.
template <DenseVectorLike Vec = DenseVector>
class BasicSgdTrainer {
 public:
  BasicSgdTrainer(std::size_t dim, Schedule schedule, double lambda, LossKind loss)
      : w_(detail::make_vector<Vec>(dim, 0.0)), schedule_(schedule), lambda_(lambda), loss_(loss) {
    if (!(lambda >= 0.0)) throw contract_error("lambda must be >= 0");
  }

  BasicSgdTrainer(const LinearModel& theta0, Schedule schedule, double lambda, LossKind loss)
      : BasicSgdTrainer(theta0.dim(), schedule, lambda, loss) {
    for (std::size_t i = 0; i < theta0.dim(); ++i) w_[i] = theta0.weights[i];
  }

  void step(const Sample& sample) {
    const std::uint64_t t = t_ + 1;
    const double gamma = rate(schedule_, t);
    const double shrink = detail::checked_shrink(lambda_, gamma);
    const double score = scale_ * dot(sample.features, w_);
    const double deriv = loss_deriv(loss_, score, sample.label);
    scale_ *= shrink;
    if (deriv != 0.0) {
      const double coef = -(gamma * deriv) / scale_;
      if (!std::isfinite(coef)) throw divergence_error("non-finite SGD update", t);
      axpy_sparse(coef, sample.features, w_);
      for (const auto& f : sample.features.entries())
        if (!std::isfinite(w_[f.index])) throw divergence_error("non-finite SGD iterate", t);
    }
    t_ = t;
    if (scale_ < 1e-100) rescale();
  }

  LinearModel theta() const {
    DenseVector out(w_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale_ * w_[i];
    return LinearModel(std::move(out));
  }

  std::uint64_t t() const noexcept { return t_; }
  std::size_t dim() const noexcept { return w_.size(); }
  const Schedule& schedule() const noexcept { return schedule_; }
  double lambda() const noexcept { return lambda_; }
  LossKind loss() const noexcept { return loss_; }

 private:
  void rescale() {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] *= scale_;
    scale_ = 1.0;
  }

  Vec w_;
  double scale_ = 1.0;
  std::uint64_t t_ = 0;
  Schedule schedule_;
  double lambda_;
  LossKind loss_;
};

using SgdTrainer = BasicSgdTrainer<>;

/// Decides when iterate averaging begins. Keeps θ̂, an exponential moving
/// average of the iterates, and moving averages of the per-sample losses of
/// θ and θ̂; averaging starts once θ̂'s loss average drops strictly below θ's.
class StartDetector {
 public:
  StartDetector() = default;
  StartDetector(std::size_t dim, double decay, std::uint64_t warmup,
                std::optional<std::uint64_t> fixed_t0 = std::nullopt)
      : theta_ema_(dim, 0.0), decay_(decay), warmup_(warmup), fixed_t0_(fixed_t0) {
    if (!(decay > 0.0 && decay < 1.0)) throw contract_error("detector decay must lie in (0, 1)");
  }

  void set_initial(std::span<const double> theta0) { theta_ema_.assign(theta0.begin(), theta0.end()); }

  /// Folds in the iterate θ_t and the pre-update losses of θ and θ̂ on the
  /// current sample. Returns true once averaging should begin (sticky).
  template <class ThetaView>
  bool update(const ThetaView& theta, double sample_loss_theta, double sample_loss_ema,
              std::uint64_t t) {
    const double keep = decay_;
    const double take = 1.0 - decay_;
    for (std::size_t i = 0; i < theta_ema_.size(); ++i)
      theta_ema_[i] = keep * theta_ema_[i] + take * theta[i];
    if (!seen_loss_) {
      loss_ema_theta_ = sample_loss_theta;
      loss_ema_ema_ = sample_loss_ema;
      seen_loss_ = true;
    } else {
      loss_ema_theta_ = keep * loss_ema_theta_ + take * sample_loss_theta;
      loss_ema_ema_ = keep * loss_ema_ema_ + take * sample_loss_ema;
    }
    if (triggered_) return true;
    if (fixed_t0_)
      triggered_ = t >= *fixed_t0_;
    else
      triggered_ = t >= warmup_ && loss_ema_ema_ < loss_ema_theta_;
    return triggered_;
  }

  const DenseVector& theta_ema() const noexcept { return theta_ema_; }
  double loss_ema_theta() const noexcept { return loss_ema_theta_; }
  double loss_ema_ema() const noexcept { return loss_ema_ema_; }
  double decay() const noexcept { return decay_; }
  std::uint64_t warmup() const noexcept { return warmup_; }
  std::optional<std::uint64_t> fixed_t0() const noexcept { return fixed_t0_; }
  bool triggered() const noexcept { return triggered_; }

 private:
  DenseVector theta_ema_;
  double loss_ema_theta_ = 0.0;
  double loss_ema_ema_ = 0.0;
  bool seen_loss_ = false;
  double decay_ = 0.99;
  std::uint64_t warmup_ = 50;
  std::optional<std::uint64_t> fixed_t0_;
  bool triggered_ = false;
};

struct AsgdOptions {
  LossKind loss = LossKind::squared_hinge;
  double lambda = 0.0;
  Schedule schedule;
  /// Start averaging after exactly this many steps; bypasses the detector.
  std::optional<std::uint64_t> fixed_t0;
  std::uint64_t warmup = 50;
  double detector_decay = 0.99;
  /// Re-anchor when α or β exceeds this (or 1/α drops below its inverse).
  double anchor_threshold = 1e100;
};

/// Sparse averaged SGD. The iterate and its running average are kept as
///   θ_t = u_t / α_t,   θ̄_t = (τ_t u_t + û_t) / β_t
/// so that both the L2 shrink and the averaging cost O(nnz(x)) per sample.
/// Averaging is uniform over θ_{t0+1..t}, i.e. η_t = 1/(t − t0).
template <DenseVectorLike Vec = DenseVector>
class BasicAsgdTrainer {
 public:
  BasicAsgdTrainer(std::size_t dim, AsgdOptions options)
      : u_(detail::make_vector<Vec>(dim, 0.0)),
        u_hat_(detail::make_vector<Vec>(dim, 0.0)),
        options_(options) {
    if (!(options.lambda >= 0.0)) throw contract_error("lambda must be >= 0");
    if (options.fixed_t0)
      t0_ = options.fixed_t0;
    else
      detector_ = StartDetector(dim, options.detector_decay, options.warmup);
  }

  BasicAsgdTrainer(const LinearModel& theta0, AsgdOptions options)
      : BasicAsgdTrainer(theta0.dim(), options) {
    for (std::size_t i = 0; i < theta0.dim(); ++i) u_[i] = theta0.weights[i];
    if (!t0_) detector_.set_initial(theta0.weights);
  }

  void step(const Sample& sample) {
    const SparseVector& x = sample.features;
    const std::uint64_t t = t_ + 1;
    const double gamma = rate(options_.schedule, t);
    const double shrink = detail::checked_shrink(options_.lambda, gamma);

    const double score = dot(x, u_) / alpha_;
    const double deriv = loss_deriv(options_.loss, score, sample.label);

    const bool detecting = !t0_;
    double loss_theta = 0.0;
    double loss_ema = 0.0;
    if (detecting) {
      loss_theta = loss_value(options_.loss, score, sample.label);
      loss_ema = loss_value(options_.loss, dot(x, detector_.theta_ema()), sample.label);
    }

    const bool averaging = t0_ && t > *t0_;
    const double alpha = alpha_ / shrink;
    const double coef = alpha * gamma * deriv;
    if (!std::isfinite(coef)) throw divergence_error("non-finite ASGD update", t);

    if (coef != 0.0) axpy_sparse(-coef, x, u_);
    if (averaging) {
      const double eta = 1.0 / static_cast<double>(t - *t0_);
      if (t - *t0_ == 1) {
        // η = 1: the average restarts at θ_t. û is still zero here.
        beta_ = 1.0;
        tau_ = 1.0 / alpha;
      } else {
        const double beta = beta_ / (1.0 - eta);
        if (coef != 0.0 && tau_ != 0.0) axpy_sparse(tau_ * coef, x, u_hat_);
        tau_ += eta * beta / alpha;
        beta_ = beta;
      }
    }
    alpha_ = alpha;
    t_ = t;

    for (const auto& f : x.entries())
      if (!std::isfinite(u_[f.index]) || !std::isfinite(u_hat_[f.index]))
        throw divergence_error("non-finite ASGD iterate", t);

    if (detecting) {
      const ScaledView view{u_, 1.0 / alpha_};
      if (detector_.update(view, loss_theta, loss_ema, t)) t0_ = t;
    }

    const double limit = options_.anchor_threshold;
    if (alpha_ > limit || beta_ > limit || 1.0 / alpha_ < 1.0 / limit) re_anchor();
  }

  /// (θ_t, θ̄_t). Before any averaged step θ̄ is θ.
  std::pair<LinearModel, LinearModel> recover() const {
    const std::size_t n = u_.size();
    DenseVector theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = u_[i] / alpha_;
    if (averaged_steps() == 0) {
      DenseVector copy = theta;
      return {LinearModel(std::move(theta)), LinearModel(std::move(copy))};
    }
    DenseVector bar(n);
    for (std::size_t i = 0; i < n; ++i) bar[i] = (tau_ * u_[i] + u_hat_[i]) / beta_;
    return {LinearModel(std::move(theta)), LinearModel(std::move(bar))};
  }

  /// Rewrites the state with α = β = 1, τ = 0 without changing (θ, θ̄).
  void re_anchor() {
    const std::size_t n = u_.size();
    if (averaged_steps() > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = u_[i] / alpha_;
        const double bar = (tau_ * u_[i] + u_hat_[i]) / beta_;
        u_[i] = theta;
        u_hat_[i] = bar;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) u_[i] = u_[i] / alpha_;
    }
    alpha_ = 1.0;
    beta_ = 1.0;
    tau_ = 0.0;
    ++anchors_;
  }

  std::uint64_t t() const noexcept { return t_; }
  std::optional<std::uint64_t> t0() const noexcept { return t0_; }
  std::uint64_t averaged_steps() const noexcept { return t0_ && t_ > *t0_ ? t_ - *t0_ : 0; }
  std::size_t dim() const noexcept { return u_.size(); }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double tau() const noexcept { return tau_; }
  std::uint64_t anchors() const noexcept { return anchors_; }
  const AsgdOptions& options() const noexcept { return options_; }
  const StartDetector& detector() const noexcept { return detector_; }

 private:
  struct ScaledView {
    const Vec& v;
    double scale;
    double operator[](std::size_t i) const { return v[i] * scale; }
  };

  Vec u_;
  Vec u_hat_;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  double tau_ = 0.0;
  std::uint64_t t_ = 0;
  std::optional<std::uint64_t> t0_;
  std::uint64_t anchors_ = 0;
  AsgdOptions options_;
  StartDetector detector_;
};

using AsgdTrainer = BasicAsgdTrainer<>;

// ---------------------------------------------------------------------------
// One-pass driver

struct TrainConfig {
  Algorithm algorithm = Algorithm::asgd;
  LossKind loss = LossKind::squared_hinge;
  double lambda = 0.0;
  Schedule schedule;
  std::optional<std::uint64_t> fixed_t0;
  std::uint64_t warmup = 50;
  /// Steps (samples consumed) after which to record metrics. A final record
  /// is always added if the last step is not already listed.
  std::vector<std::uint64_t> checkpoints;
  /// Used to express steps as passes; 0 means unknown.
  std::uint64_t samples_per_pass = 0;
  bool record_time = true;
};

struct Evaluation {
  std::optional<double> error_rate;
  double cost = 0.0;
  std::optional<double> excess_risk;
};

struct TrainResult {
  LinearModel theta;
  LinearModel theta_bar;
  std::vector<MetricsRecord> theta_records;
  /// Empty for the SGD baseline.
  std::vector<MetricsRecord> theta_bar_records;
  std::optional<std::uint64_t> t0;
  std::uint64_t steps = 0;
};

/// Geometrically spaced checkpoints over total_steps, `points` in all,
/// always ending at total_steps.
inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t total_steps, std::size_t points) {
  std::vector<std::uint64_t> out;
  if (total_steps == 0 || points == 0) return out;
  const double log_total = std::log(static_cast<double>(total_steps));
  for (std::size_t k = 1; k <= points; ++k) {
    auto step = static_cast<std::uint64_t>(
        std::ceil(std::exp(log_total * static_cast<double>(k) / static_cast<double>(points)) - 1e-9));
    step = std::clamp<std::uint64_t>(step, 1, total_steps);
    if (out.empty() || step > out.back()) out.push_back(step);
  }
  if (out.back() != total_steps) out.push_back(total_steps);
  return out;
}

/// Consumes every sample produced by `next` (a callable returning
/// std::optional<Sample> or a pointer-like to Sample) exactly once, in order.
/// `evaluate(const LinearModel&) -> Evaluation` is called at checkpoints.
template <class Next, class Evaluate>
TrainResult train_one_pass(std::size_t dim, const TrainConfig& config, Next&& next, Evaluate&& evaluate,
                           const LinearModel* theta0 = nullptr) {
  using clock = std::chrono::steady_clock;
  TrainResult result;
  std::optional<SgdTrainer> sgd;
  std::optional<AsgdTrainer> asgd;
  if (config.algorithm == Algorithm::sgd) {
    sgd = theta0 ? SgdTrainer(*theta0, config.schedule, config.lambda, config.loss)
                 : SgdTrainer(dim, config.schedule, config.lambda, config.loss);
  } else {
    AsgdOptions opts;
    opts.loss = config.loss;
    opts.lambda = config.lambda;
    opts.schedule = config.schedule;
    opts.fixed_t0 = config.fixed_t0;
    opts.warmup = config.warmup;
    asgd = theta0 ? AsgdTrainer(*theta0, opts) : AsgdTrainer(dim, opts);
  }

  double train_seconds = 0.0;
  std::size_t next_checkpoint = 0;
  std::uint64_t step = 0;

  auto record = [&](std::uint64_t at) {
    MetricsRecord base;
    base.step = at;
    base.passes = config.samples_per_pass
                      ? static_cast<double>(at) / static_cast<double>(config.samples_per_pass)
                      : 0.0;
    base.elapsed_seconds = config.record_time ? train_seconds : 0.0;
    auto fill = [&](const LinearModel& m) {
      MetricsRecord r = base;
      Evaluation e = evaluate(m);
      r.test_error_rate = e.error_rate;
      r.test_cost = e.cost;
      r.excess_risk = e.excess_risk;
      return r;
    };
    if (sgd) {
      result.theta_records.push_back(fill(sgd->theta()));
    } else {
      auto [theta, bar] = asgd->recover();
      result.theta_records.push_back(fill(theta));
      result.theta_bar_records.push_back(fill(bar));
    }
  };

  while (true) {
    auto sample = next();
    if (!sample) break;
    const auto start = config.record_time ? clock::now() : clock::time_point{};
    if (sgd)
      sgd->step(*sample);
    else
      asgd->step(*sample);
    if (config.record_time) train_seconds += std::chrono::duration<double>(clock::now() - start).count();
    ++step;
    while (next_checkpoint < config.checkpoints.size() && config.checkpoints[next_checkpoint] < step)
      ++next_checkpoint;
    if (next_checkpoint < config.checkpoints.size() && config.checkpoints[next_checkpoint] == step) {
      record(step);
      ++next_checkpoint;
    }
  }
  if (step == 0) throw data_error("train_one_pass: empty sample stream");
  if (result.theta_records.empty() || result.theta_records.back().step != step) record(step);

  result.steps = step;
  if (sgd) {
    result.theta = sgd->theta();
    result.theta_bar = result.theta;
  } else {
    auto [theta, bar] = asgd->recover();
    result.theta = std::move(theta);
    result.theta_bar = std::move(bar);
    result.t0 = asgd->t0();
  }
  return result;
}

/// Convenience overload over an in-memory dataset.
template <class Evaluate>
TrainResult train_one_pass(std::size_t dim, const TrainConfig& config, std::span<const Sample> samples,
                           Evaluate&& evaluate, const LinearModel* theta0 = nullptr) {
  std::size_t i = 0;
  TrainConfig cfg = config;
  if (cfg.samples_per_pass == 0) cfg.samples_per_pass = samples.size();
  return train_one_pass(
      dim, cfg, [&]() -> const Sample* { return i < samples.size() ? &samples[i++] : nullptr; },
      std::forward<Evaluate>(evaluate), theta0);
}

}  // namespace asgd
