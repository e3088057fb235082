#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asgd/core.hpp"
#include "asgd/losses.hpp"
#include "asgd/stats.hpp"
#include "asgd/trainers.hpp"

namespace asgd {

/// ŷ = sign(θᵀx); a score of exactly 0 is never correct.
inline bool misclassified(double score, double label) { return !(score * label > 0.0); }

/// Error rate (classification losses only) and regularized cost
/// mean L(θᵀx, y) + λ/2 ‖θ‖² over `samples`.
inline Evaluation evaluate(const LinearModel& model, std::span<const Sample> samples, LossKind loss, double lambda) {
  if (samples.empty()) throw data_error("evaluate: empty test set");
  CompensatedSum cost;
  std::uint64_t errors = 0;
  for (const auto& s : samples) {
    const double score = dot(s.features, model.weights);
    cost.add(loss_value(loss, score, s.label));
    if (misclassified(score, s.label)) ++errors;
  }
  CompensatedSum sq;
  for (double w : model.weights) sq.add(w * w);
  Evaluation e;
  const auto n = static_cast<double>(samples.size());
  e.cost = cost.value() / n + 0.5 * lambda * sq.value();
  if (is_classification(loss)) e.error_rate = static_cast<double>(errors) / n;
  return e;
}

// ---------------------------------------------------------------------------
// Metrics CSV: '#'-prefixed "key=value" header lines, then
// step,passes,model,error_rate,cost,excess_risk,seconds

using RunHeader = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kMetricsColumns = "step,passes,model,error_rate,cost,excess_risk,seconds";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_metrics_row(const MetricsRecord& r, const std::string& model) {
  std::string out = std::to_string(r.step);
  out += ',' + format_double(r.passes);
  out += ',' + model;
  out += ',' + (r.test_error_rate ? format_double(*r.test_error_rate) : std::string());
  out += ',' + format_double(r.test_cost);
  out += ',' + (r.excess_risk ? format_double(*r.excess_risk) : std::string());
  out += ',' + format_double(r.elapsed_seconds);
  return out;
}

inline void write_metrics_csv(std::ostream& os, const RunHeader& header, const TrainResult& result) {
  for (const auto& [k, v] : header) os << "# " << k << '=' << v << '\n';
  os << kMetricsColumns << '\n';
  // Interleave θ and θ̄ rows by step.
  for (std::size_t i = 0; i < result.theta_records.size(); ++i) {
    os << format_metrics_row(result.theta_records[i], "theta") << '\n';
    if (i < result.theta_bar_records.size())
      os << format_metrics_row(result.theta_bar_records[i], "theta_bar") << '\n';
  }
}

}  // namespace asgd
