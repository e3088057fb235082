// In-memory sparse classification: ASGD's averaged iterate against plain SGD
// after one pass, both with the auto schedule.
#include <cstdio>

#include "asgd/asgd.hpp"

int main() {
  using namespace asgd;
  SparseClassificationSpec spec;
  spec.dim = 1000;
  spec.samples = 50000;
  const auto train = make_sparse_classification(spec, 3);
  spec.samples = 10000;
  spec.seed = 2;
  const auto test = make_sparse_classification(spec, 3);

  const double lambda = 1e-4;
  const double M = estimate_M(train);
  const LossKind loss = LossKind::squared_hinge;
  auto eval = [&](const LinearModel& m) { return evaluate(m, test, loss, lambda); };

  TrainConfig cfg;
  cfg.loss = loss;
  cfg.lambda = lambda;
  cfg.checkpoints = geometric_checkpoints(train.size(), 8);
  cfg.schedule = recommended_schedule(loss, M, lambda);
  const TrainResult asgd = train_one_pass(spec.dim, cfg, std::span<const Sample>(train), eval);

  cfg.algorithm = Algorithm::sgd;
  cfg.schedule = Schedule::make(1.0 / M, lambda, 1.0);
  const TrainResult sgd = train_one_pass(spec.dim, cfg, std::span<const Sample>(train), eval);

  std::printf("M_hat %.4g, averaging started at t0 = %llu\n", M,
              static_cast<unsigned long long>(asgd.t0.value_or(0)));
  std::printf("%8s  %12s  %12s  %12s\n", "step", "sgd theta", "asgd theta", "asgd bar");
  for (std::size_t i = 0; i < asgd.theta_records.size(); ++i)
    std::printf("%8llu  %12.4f  %12.4f  %12.4f\n", static_cast<unsigned long long>(asgd.theta_records[i].step),
                *sgd.theta_records[i].test_error_rate, *asgd.theta_records[i].test_error_rate,
                *asgd.theta_bar_records[i].test_error_rate);
}
