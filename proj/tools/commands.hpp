#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "asgd/asgd.hpp"
#include "asgd/theory/suite.hpp"

namespace asgd::cli {

using json = nlohmann::json;

inline constexpr const char* kOutputDirEnv = "ASGD_OUTPUT_DIR";

struct DataConfig {
  std::string path;
  std::optional<std::size_t> dim;
  bool bias = false;
  /// "signs", "passthrough", or an object {"<raw>": ±1, "*": ±1}. Null picks
  /// "signs" for classification losses and "passthrough" for squared loss.
  json label_map;
  std::size_t m_prefix = 1000;
};

struct TrainerConfig {
  Algorithm algorithm = Algorithm::asgd;
  LossKind loss = LossKind::squared_hinge;
  double lambda = 0.0;
  /// nullopt means "auto".
  std::optional<Schedule> schedule;
  /// Fixed averaging start; nullopt runs the detector.
  std::optional<std::uint64_t> t0;
  /// M for the auto schedule; nullopt uses the estimate from the data.
  std::optional<double> M;
  std::uint64_t warmup = 50;
};

struct RunConfig {
  std::optional<std::string> preset;
  DataConfig data;
  std::optional<DataConfig> test;
  TrainerConfig trainer;
  /// Geometric checkpoints per pass, or an explicit step list.
  std::variant<std::size_t, std::vector<std::uint64_t>> checkpoints = std::size_t{20};
  /// When false, the seconds column is written as 0 so reruns are byte-identical.
  bool timing = true;
  std::uint64_t passes = 1;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string metrics = "metrics.csv";
  std::string snapshot = "model.json";
};

/// Builds a RunConfig from JSON. A "preset" key fills λ, M, t0, loss and dim
/// where the JSON leaves them unset. Unknown keys are rejected.
RunConfig parse_run_config(const json& j);

LabelMapping make_label_mapping(const json& spec, LossKind loss);

/// Resolves the schedule actually used: explicit, or γ0 = 1/M, a = λ with
/// c = 2/3 (squared) or 3/4 for ASGD and c = 1 for the SGD baseline.
Schedule resolve_schedule(const TrainerConfig& t, double M_hat);

/// Joins `name` onto dir unless it is absolute.
std::string output_path(const std::string& dir, const std::string& name);

int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const std::string& snapshot, const RunConfig& cfg, std::ostream& out);

struct SyntheticConfig {
  std::string which = "toy1";
  std::size_t seeds = 10;
  std::optional<std::uint64_t> steps;
  std::uint64_t seed = 0;
  std::size_t points = 20;
  unsigned threads = 0;
  std::string output_dir = ".";
  std::string output = "synthetic.csv";
};
int cmd_synthetic(const SyntheticConfig& cfg, std::ostream& out);

struct VerifyConfig {
  theory::VerifyOptions options;
  std::optional<std::string> json_path;
};
int cmd_verify(const VerifyConfig& cfg, std::ostream& out);

struct GendataConfig {
  SparseClassificationSpec train;
  std::size_t test_samples = 20000;
  std::uint64_t teacher_seed = 0;
  std::string train_path = "train.svm";
  std::string test_path = "test.svm";
  std::string output_dir = ".";
};
int cmd_gendata(const GendataConfig& cfg, std::ostream& out);

/// Full command line entry point. Returns the process exit status:
/// 0 success, 1 a verify check failed, 2 any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asgd::cli
