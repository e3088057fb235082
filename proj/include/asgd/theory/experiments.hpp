#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/core.hpp"
#include "asgd/errors.hpp"
#include "asgd/parallel.hpp"
#include "asgd/schedule.hpp"
#include "asgd/stats.hpp"
#include "asgd/trainers.hpp"
#include "asgd/theory/dense_sgd.hpp"
#include "asgd/theory/linalg.hpp"
#include "asgd/theory/synthetic.hpp"

namespace asgd::theory {

struct ExperimentOptions {
  std::size_t seeds = 10;
  std::uint64_t steps = 10000;
  std::uint64_t base_seed = 0;
  /// Geometric checkpoints over `steps`.
  std::size_t points = 20;
  unsigned threads = 0;
};

struct ArmSummary {
  std::string name;
  /// Schedule description, or "batch" for the batch estimator.
  std::string schedule;
  /// Excess risk per checkpoint, averaged over seeds.
  std::vector<MeanStderr> excess;
};

struct ExperimentReport {
  std::string problem;
  std::vector<std::uint64_t> steps;
  std::vector<ArmSummary> arms;
  std::size_t seeds = 0;

  const ArmSummary& arm(const std::string& name) const {
    for (const auto& a : arms)
      if (a.name == name) return a;
    throw contract_error("no arm named " + name);
  }
  double final_excess(const std::string& name) const { return arm(name).excess.back().mean; }
};

namespace detail {

// values[arm][checkpoint][seed] -> report
inline ExperimentReport summarize(std::string problem, std::vector<std::uint64_t> steps,
                                  std::vector<ArmSummary> arms,
                                  const std::vector<std::vector<std::vector<double>>>& values) {
  ExperimentReport r;
  r.problem = std::move(problem);
  r.seeds = values.empty() || values[0].empty() ? 0 : values[0][0].size();
  for (std::size_t a = 0; a < arms.size(); ++a)
    for (std::size_t k = 0; k < steps.size(); ++k) arms[a].excess.push_back(mean_stderr(values[a][k]));
  r.steps = std::move(steps);
  r.arms = std::move(arms);
  return r;
}

inline void check_options(const ExperimentOptions& o) {
  if (o.seeds == 0) throw contract_error("experiment needs at least one seed");
  if (o.steps == 0) throw contract_error("experiment needs at least one step");
}

}  // namespace detail

/// Schedules of the quadratic toy: γ_t = (1+0.02t)^(−2/3) for ASGD,
/// (1+t)^(−1/2) for ASGD_BAD and (1+0.02t)^(−1) for SGD.
inline Schedule toy1_asgd_schedule() { return Schedule::make(1.0, 0.02, 2.0 / 3.0); }
inline Schedule toy1_bad_schedule() { return Schedule::make(1.0, 1.0, 0.5); }
inline Schedule toy1_sgd_schedule() { return Schedule::make(1.0, 0.02, 1.0); }

/// Quadratic toy: arms asgd, asgd_bad, sgd, batch. Every arm sees the same
/// draws; all SGD arms start from θ0 = 1. The stochastic gradient at x is
/// A(θ − x).
inline ExperimentReport run_toy1(const ExperimentOptions& opt) {
  detail::check_options(opt);
  const SyntheticProblem p = make_quadratic_toy(opt.base_seed);
  const auto steps = geometric_checkpoints(opt.steps, opt.points);
  std::vector<ArmSummary> arms = {{"asgd", to_string(toy1_asgd_schedule()), {}},
                                  {"asgd_bad", to_string(toy1_bad_schedule()), {}},
                                  {"sgd", to_string(toy1_sgd_schedule()), {}},
                                  {"batch", "batch", {}}};
  std::vector<std::vector<std::vector<double>>> values(
      arms.size(), std::vector<std::vector<double>>(steps.size(), std::vector<double>(opt.seeds)));

  parallel_for(
      opt.seeds,
      [&](std::size_t s) {
        Rng rng = replicate_rng(opt.base_seed, s);
        FeatureSampler sampler(p);
        const Vector ones = Vector::Ones(p.dim());
        DenseAsgd asgd(ones, toy1_asgd_schedule());
        DenseAsgd bad(ones, toy1_bad_schedule());
        DenseAsgd sgd(ones, toy1_sgd_schedule());
        Vector sum = Vector::Zero(p.dim());
        Vector x(p.dim());
        std::size_t k = 0;
        for (std::uint64_t t = 1; t <= opt.steps; ++t) {
          sampler.draw(rng, x);
          auto grad = [&](const Vector& th) -> Vector { return p.eigenvalues.cwiseProduct(th - x); };
          asgd.step(grad);
          bad.step(grad);
          sgd.step(grad);
          sum += x;
          if (k < steps.size() && steps[k] == t) {
            values[0][k][s] = excess_risk(p, asgd.theta_bar());
            values[1][k][s] = excess_risk(p, bad.theta_bar());
            values[2][k][s] = excess_risk(p, sgd.theta());
            values[3][k][s] = excess_risk(p, Vector(sum / static_cast<double>(t)));
            ++k;
          }
        }
      },
      opt.threads);
  return detail::summarize("toy1", steps, std::move(arms), values);
}

/// Schedules of the regression toy, both with γ0 = 1/tr(A) and a = λ0:
/// c = 2/3 for ASGD and c = 1 for SGD.
inline Schedule toy2_asgd_schedule(const SyntheticProblem& p) {
  return Schedule::make(1.0 / p.trace(), p.lambda0(), 2.0 / 3.0);
}
inline Schedule toy2_sgd_schedule(const SyntheticProblem& p) {
  return Schedule::make(1.0 / p.trace(), p.lambda0(), 1.0);
}

inline Sample dense_sample(const Vector& x, double y) {
  std::vector<Feature> f;
  f.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) f.push_back({static_cast<std::uint32_t>(i), x(i)});
  return Sample{SparseVector(std::move(f), static_cast<std::size_t>(x.size())), y};
}

inline Vector to_eigen(const LinearModel& m) {
  return Eigen::Map<const Vector>(m.weights.data(), static_cast<Eigen::Index>(m.dim()));
}

/// Regression toy: arms asgd (sparse ASGD trainer, averaging from the first
/// step), sgd and batch least squares. θ0 = 0, squared loss, no L2 term.
inline ExperimentReport run_toy2(const ExperimentOptions& opt) {
  detail::check_options(opt);
  const SyntheticProblem p = make_regression_toy(opt.base_seed);
  const auto steps = geometric_checkpoints(opt.steps, opt.points);
  std::vector<ArmSummary> arms = {{"asgd", to_string(toy2_asgd_schedule(p)), {}},
                                  {"sgd", to_string(toy2_sgd_schedule(p)), {}},
                                  {"batch", "batch", {}}};
  std::vector<std::vector<std::vector<double>>> values(
      arms.size(), std::vector<std::vector<double>>(steps.size(), std::vector<double>(opt.seeds)));

  parallel_for(
      opt.seeds,
      [&](std::size_t s) {
        Rng rng = replicate_rng(opt.base_seed, s);
        FeatureSampler sampler(p);
        const auto dim = static_cast<std::size_t>(p.dim());
        AsgdOptions ao;
        ao.loss = LossKind::squared;
        ao.lambda = 0.0;
        ao.schedule = toy2_asgd_schedule(p);
        ao.fixed_t0 = 0;
        AsgdTrainer asgd(dim, ao);
        SgdTrainer sgd(dim, toy2_sgd_schedule(p), 0.0, LossKind::squared);
        LeastSquaresAccumulator batch(p.dim());
        std::size_t k = 0;
        for (std::uint64_t t = 1; t <= opt.steps; ++t) {
          const RegressionDraw d = draw_regression(p, sampler, rng);
          const Sample sample = dense_sample(d.x, d.y);
          asgd.step(sample);
          sgd.step(sample);
          batch.add(d.x, d.y);
          if (k < steps.size() && steps[k] == t) {
            values[0][k][s] = excess_risk(p, to_eigen(asgd.recover().second));
            values[1][k][s] = excess_risk(p, to_eigen(sgd.theta()));
            values[2][k][s] = excess_risk(p, batch.solve());
            ++k;
          }
        }
      },
      opt.threads);
  return detail::summarize("toy2", steps, std::move(arms), values);
}

}  // namespace asgd::theory
