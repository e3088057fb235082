#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "asgd/theory.hpp"

namespace asgd::cli {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// JSON helpers

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw contract_error(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw contract_error("unknown key '" + key + "' in " + where);
  }
}

template <class T>
std::optional<T> get_opt(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw contract_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

Schedule parse_schedule(const json& j) {
  reject_unknown(j, {"gamma0", "a", "c"}, "schedule");
  if (!j.contains("gamma0") || !j.contains("a") || !j.contains("c"))
    throw contract_error("schedule needs gamma0, a and c");
  return Schedule::make(j.at("gamma0").get<double>(), j.at("a").get<double>(), j.at("c").get<double>());
}

/// "auto" or "gamma0,a,c".
json schedule_flag_to_json(const std::string& s) {
  if (s == "auto") return "auto";
  std::stringstream ss(s);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
  if (v.size() != 3) throw contract_error("--schedule expects 'auto' or 'gamma0,a,c'");
  return json{{"gamma0", v[0]}, {"a", v[1]}, {"c", v[2]}};
}

/// A count ("20") or a comma-separated step list ("10,100,1000").
json checkpoints_flag_to_json(const std::string& s) {
  if (s.find(',') == std::string::npos) return std::stoull(s);
  json arr = json::array();
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) arr.push_back(std::stoull(part));
  return arr;
}

DataConfig parse_data(const json& j, const std::string& where) {
  reject_unknown(j, {"path", "dim", "bias", "label_map", "m_prefix"}, where);
  DataConfig d;
  d.path = get_opt<std::string>(j, "path").value_or("");
  d.dim = get_opt<std::size_t>(j, "dim");
  d.bias = get_opt<bool>(j, "bias").value_or(false);
  if (j.contains("label_map")) d.label_map = j.at("label_map");
  d.m_prefix = get_opt<std::size_t>(j, "m_prefix").value_or(1000);
  if (d.m_prefix == 0) throw contract_error(where + ".m_prefix must be >= 1");
  return d;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open config " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw contract_error("config " + path + ": " + e.what());
  }
}

std::string resolve_output_dir(const std::optional<std::string>& configured) {
  if (configured) return *configured;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// ---------------------------------------------------------------------------
// Snapshot

json model_json(const LinearModel& m) { return m.weights; }

void write_snapshot(const std::string& path, const json& j) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << j.dump(1) << '\n';
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

// ---------------------------------------------------------------------------

std::string output_path(const std::string& dir, const std::string& name) {
  const fs::path p(name);
  if (p.is_absolute() || dir.empty()) return name;
  return (fs::path(dir) / p).string();
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, {"preset", "data", "test", "trainer", "eval", "passes", "seed", "output"}, "run config");
  RunConfig c;
  c.preset = get_opt<std::string>(j, "preset");
  c.data = parse_data(j.value("data", json::object()), "data");
  if (j.contains("test") && !j.at("test").is_null()) {
    DataConfig t = parse_data(j.at("test"), "test");
    const json& tj = j.at("test");
    if (!tj.contains("dim")) t.dim = c.data.dim;
    if (!tj.contains("bias")) t.bias = c.data.bias;
    if (!tj.contains("label_map")) t.label_map = c.data.label_map;
    c.test = t;
  }

  const json tj = j.value("trainer", json::object());
  reject_unknown(tj, {"algorithm", "loss", "lambda", "schedule", "t0", "M", "warmup"}, "trainer");
  const Preset* preset = nullptr;
  if (c.preset) {
    preset = find_preset(*c.preset);
    if (!preset) throw contract_error("unknown preset '" + *c.preset + "'");
  }
  if (auto a = get_opt<std::string>(tj, "algorithm")) {
    if (*a == "sgd")
      c.trainer.algorithm = Algorithm::sgd;
    else if (*a == "asgd")
      c.trainer.algorithm = Algorithm::asgd;
    else
      throw contract_error("algorithm must be sgd or asgd, got '" + *a + "'");
  }
  if (auto l = get_opt<std::string>(tj, "loss")) {
    auto k = parse_loss_kind(*l);
    if (!k) throw contract_error("unknown loss '" + *l + "'");
    c.trainer.loss = *k;
  } else if (preset) {
    c.trainer.loss = preset->loss;
  }
  if (auto l = get_opt<double>(tj, "lambda"))
    c.trainer.lambda = *l;
  else if (preset)
    c.trainer.lambda = preset->lambda;
  if (!(c.trainer.lambda >= 0.0)) throw contract_error("lambda must be >= 0");

  if (tj.contains("schedule") && !(tj.at("schedule").is_string() && tj.at("schedule") == "auto")) {
    if (!tj.at("schedule").is_object()) throw contract_error("schedule must be \"auto\" or an object");
    c.trainer.schedule = parse_schedule(tj.at("schedule"));
  }
  if (tj.contains("t0")) {
    const json& t0 = tj.at("t0");
    if (t0.is_string() && t0 == "detect")
      c.trainer.t0.reset();
    else if (t0.is_number_unsigned() || t0.is_number_integer())
      c.trainer.t0 = t0.get<std::uint64_t>();
    else
      throw contract_error("t0 must be a step count or \"detect\"");
  } else if (preset) {
    c.trainer.t0 = preset->t0;
  }
  if (auto M = get_opt<double>(tj, "M")) {
    if (!(*M > 0.0)) throw contract_error("M must be > 0");
    c.trainer.M = *M;
  } else if (preset) {
    c.trainer.M = preset->M;
  }
  c.trainer.warmup = get_opt<std::uint64_t>(tj, "warmup").value_or(50);
  if (preset && !c.data.dim) {
    c.data.dim = preset->dim;
    if (c.test && !c.test->dim) c.test->dim = preset->dim;
  }

  const json ej = j.value("eval", json::object());
  reject_unknown(ej, {"checkpoints", "timing"}, "eval");
  if (ej.contains("checkpoints")) {
    const json& cp = ej.at("checkpoints");
    if (cp.is_array())
      c.checkpoints = cp.get<std::vector<std::uint64_t>>();
    else if (cp.is_number_unsigned() || cp.is_number_integer())
      c.checkpoints = cp.get<std::size_t>();
    else
      throw contract_error("eval.checkpoints must be a count or a list of steps");
  }
  c.timing = get_opt<bool>(ej, "timing").value_or(true);

  c.passes = get_opt<std::uint64_t>(j, "passes").value_or(1);
  if (c.passes == 0) throw contract_error("passes must be >= 1");
  c.seed = get_opt<std::uint64_t>(j, "seed").value_or(0);

  const json oj = j.value("output", json::object());
  reject_unknown(oj, {"dir", "metrics", "snapshot"}, "output");
  c.output_dir = resolve_output_dir(get_opt<std::string>(oj, "dir"));
  c.metrics = get_opt<std::string>(oj, "metrics").value_or(c.metrics);
  c.snapshot = get_opt<std::string>(oj, "snapshot").value_or(c.snapshot);
  return c;
}

LabelMapping make_label_mapping(const json& spec, LossKind loss) {
  if (spec.is_null()) return is_classification(loss) ? LabelMapping::signs() : LabelMapping::passthrough();
  if (spec.is_string()) {
    if (spec == "signs") return LabelMapping::signs();
    if (spec == "passthrough") return LabelMapping::passthrough();
    throw contract_error("label_map must be \"signs\", \"passthrough\" or an object");
  }
  if (!spec.is_object()) throw contract_error("label_map must be \"signs\", \"passthrough\" or an object");
  std::map<double, double> map;
  std::optional<double> other;
  for (const auto& [key, value] : spec.items()) {
    const double target = value.get<double>();
    if (key == "*") {
      other = target;
      continue;
    }
    std::size_t used = 0;
    double raw = 0.0;
    try {
      raw = std::stod(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != key.size()) throw contract_error("label_map key '" + key + "' is not a number");
    map[raw] = target;
  }
  return LabelMapping::binary(std::move(map), other);
}

Schedule resolve_schedule(const TrainerConfig& t, double M_hat) {
  if (t.schedule) return *t.schedule;
  const double M = t.M.value_or(M_hat);
  if (!(t.lambda > 0.0)) throw contract_error("schedule \"auto\" needs lambda > 0 (used as the curvature bound)");
  if (t.algorithm == Algorithm::sgd) return Schedule::make(1.0 / M, t.lambda, 1.0);
  return recommended_schedule(t.loss, M, t.lambda);
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.data.path.empty()) throw contract_error("train needs data.path");
  if (!cfg.test || cfg.test->path.empty()) throw contract_error("train needs test.path for evaluation");
  const TrainerConfig& tc = cfg.trainer;

  auto open_train = [&](std::optional<std::size_t> dim) {
    IngestOptions io{cfg.data.path, dim, cfg.data.bias, cfg.data.m_prefix};
    return std::make_unique<SampleStream>(io, make_label_mapping(cfg.data.label_map, tc.loss));
  };
  auto stream = open_train(cfg.data.dim);
  const DatasetMeta meta = stream->meta();
  const std::uint64_t n = count_samples(cfg.data.path);

  IngestOptions test_io{cfg.test->path, meta.dim, cfg.test->bias, cfg.test->m_prefix};
  if (cfg.test->bias != cfg.data.bias) throw contract_error("test.bias must match data.bias");
  DatasetMeta test_meta;
  const std::vector<Sample> test =
      read_libsvm(test_io, make_label_mapping(cfg.test->label_map, tc.loss), &test_meta);

  const Schedule schedule = resolve_schedule(tc, meta.M_hat);

  TrainConfig train;
  train.algorithm = tc.algorithm;
  train.loss = tc.loss;
  train.lambda = tc.lambda;
  train.schedule = schedule;
  train.fixed_t0 = tc.t0;
  train.warmup = tc.warmup;
  train.samples_per_pass = n;
  train.record_time = cfg.timing;
  const std::uint64_t total = n * cfg.passes;
  if (const auto* count = std::get_if<std::size_t>(&cfg.checkpoints))
    train.checkpoints = geometric_checkpoints(total, *count * cfg.passes);
  else
    train.checkpoints = std::get<std::vector<std::uint64_t>>(cfg.checkpoints);
  std::sort(train.checkpoints.begin(), train.checkpoints.end());

  std::uint64_t pass = 1;
  auto next = [&]() -> std::optional<Sample> {
    auto s = stream->next();
    if (!s && pass < cfg.passes) {
      ++pass;
      stream = open_train(meta.dim);
      s = stream->next();
    }
    return s;
  };
  auto eval = [&](const LinearModel& m) { return evaluate(m, test, tc.loss, tc.lambda); };

  const TrainResult result = train_one_pass(meta.model_dim, train, next, eval);

  RunHeader header = {
      {"version", kVersion},
      {"command", "train"},
      {"data", cfg.data.path},
      {"test", cfg.test->path},
      {"preset", cfg.preset.value_or("")},
      {"algorithm", std::string(to_string(tc.algorithm))},
      {"loss", std::string(to_string(tc.loss))},
      {"lambda", fmt(tc.lambda)},
      {"schedule", (tc.schedule ? "explicit " : "auto ") + to_string(schedule)},
      {"M_hat", fmt(meta.M_hat)},
      {"M_used", tc.schedule ? std::string() : fmt(tc.M.value_or(meta.M_hat))},
      {"t0", result.t0 ? std::to_string(*result.t0) : std::string()},
      {"t0_source", tc.algorithm == Algorithm::sgd ? "none" : (tc.t0 ? "fixed" : "detector")},
      {"dim", std::to_string(meta.dim)},
      {"bias", cfg.data.bias ? "1" : "0"},
      {"samples_per_pass", std::to_string(n)},
      {"passes", std::to_string(cfg.passes)},
      {"test_samples", std::to_string(test.size())},
      {"seed", std::to_string(cfg.seed)},
      {"timing", cfg.timing ? "1" : "0"},
  };

  const std::string metrics_path = output_path(cfg.output_dir, cfg.metrics);
  ensure_parent(metrics_path);
  {
    std::ofstream csv(metrics_path);
    if (!csv) throw data_error("cannot write " + metrics_path);
    write_metrics_csv(csv, header, result);
  }

  json snap = {
      {"version", kVersion},
      {"algorithm", std::string(to_string(tc.algorithm))},
      {"loss", std::string(to_string(tc.loss))},
      {"lambda", tc.lambda},
      {"schedule", {{"gamma0", schedule.gamma0}, {"a", schedule.a}, {"c", schedule.c}}},
      {"dim", meta.dim},
      {"bias", cfg.data.bias},
      {"t0", result.t0 ? json(*result.t0) : json(nullptr)},
      {"steps", result.steps},
      {"theta", model_json(result.theta)},
      {"theta_bar", model_json(result.theta_bar)},
  };
  const std::string snapshot_path = output_path(cfg.output_dir, cfg.snapshot);
  write_snapshot(snapshot_path, snap);

  const MetricsRecord& last = result.theta_bar_records.empty() ? result.theta_records.back()
                                                                : result.theta_bar_records.back();
  out << "trained " << to_string(tc.algorithm) << " on " << result.steps << " samples, schedule "
      << to_string(schedule) << ", M_hat " << fmt(meta.M_hat);
  if (result.t0) out << ", t0 " << *result.t0;
  out << "\nfinal " << (result.theta_bar_records.empty() ? "theta" : "theta_bar") << ": cost "
      << fmt(last.test_cost);
  if (last.test_error_rate) out << ", error rate " << fmt(*last.test_error_rate);
  out << "\nmetrics " << metrics_path << "\nsnapshot " << snapshot_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& snapshot, const RunConfig& cfg, std::ostream& out) {
  const json snap = read_json_file(snapshot);
  for (const char* key : {"loss", "lambda", "dim", "bias", "theta", "theta_bar"})
    if (!snap.contains(key)) throw data_error(std::string("snapshot is missing '") + key + "'");
  const auto loss = parse_loss_kind(snap.at("loss").get<std::string>());
  if (!loss) throw data_error("snapshot has an unknown loss");
  const double lambda = snap.at("lambda").get<double>();
  const auto dim = snap.at("dim").get<std::size_t>();
  const bool bias = snap.at("bias").get<bool>();
  const LinearModel theta(snap.at("theta").get<DenseVector>());
  const LinearModel bar(snap.at("theta_bar").get<DenseVector>());
  if (theta.dim() != dim + (bias ? 1 : 0) || bar.dim() != theta.dim())
    throw data_error("snapshot weight length does not match its dim");

  const DataConfig& dc = cfg.test ? *cfg.test : cfg.data;
  if (dc.path.empty()) throw contract_error("eval needs a test file");
  if (dc.dim && *dc.dim != dim)
    throw data_error("data dim " + std::to_string(*dc.dim) + " does not match snapshot dim " + std::to_string(dim));
  std::vector<Sample> test;
  try {
    test = read_libsvm(IngestOptions{dc.path, dim, bias, dc.m_prefix}, make_label_mapping(dc.label_map, *loss));
  } catch (const data_error& e) {
    throw data_error(std::string("test data does not fit the snapshot: ") + e.what());
  }
  out << "model,error_rate,cost\n";
  for (const auto& [name, m] : {std::pair{"theta", &theta}, std::pair{"theta_bar", &bar}}) {
    const Evaluation e = evaluate(*m, test, *loss, lambda);
    out << name << ',' << (e.error_rate ? fmt(*e.error_rate) : std::string()) << ',' << fmt(e.cost) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synthetic

int cmd_synthetic(const SyntheticConfig& cfg, std::ostream& out) {
  theory::ExperimentOptions o;
  o.seeds = cfg.seeds;
  o.base_seed = cfg.seed;
  o.points = cfg.points;
  o.threads = cfg.threads;
  theory::ExperimentReport rep;
  if (cfg.which == "toy1") {
    o.steps = cfg.steps.value_or(10000);
    rep = theory::run_toy1(o);
  } else if (cfg.which == "toy2") {
    o.steps = cfg.steps.value_or(100000);
    rep = theory::run_toy2(o);
  } else {
    throw contract_error("synthetic problem must be toy1 or toy2, got '" + cfg.which + "'");
  }

  const std::string path = output_path(cfg.output_dir, cfg.output);
  ensure_parent(path);
  std::ofstream csv(path);
  if (!csv) throw data_error("cannot write " + path);
  csv << "# version=" << kVersion << "\n# command=synthetic\n# problem=" << rep.problem << "\n# seeds=" << rep.seeds
      << "\n# seed=" << cfg.seed << "\n# steps=" << o.steps << '\n';
  for (const auto& a : rep.arms) csv << "# arm." << a.name << '=' << a.schedule << '\n';
  csv << "step,arm,excess_risk,std_error\n";
  for (std::size_t k = 0; k < rep.steps.size(); ++k)
    for (const auto& a : rep.arms)
      csv << rep.steps[k] << ',' << a.name << ',' << fmt(a.excess[k].mean) << ',' << fmt(a.excess[k].std_error)
          << '\n';

  out << rep.problem << " after " << rep.steps.back() << " steps, " << rep.seeds << " seeds\n";
  for (const auto& a : rep.arms)
    out << "  " << std::left << std::setw(9) << a.name << " excess " << std::setprecision(6)
        << a.excess.back().mean << " (stderr " << std::setprecision(3) << a.excess.back().std_error << ")  "
        << a.schedule << '\n';
  out << "trajectories " << path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const VerifyConfig& cfg, std::ostream& out) {
  const auto results = theory::run_verify_suite(cfg.options);
  bool all = true;
  out << std::left << std::setw(24) << "check" << std::setw(8) << "result" << "seconds\n";
  for (const auto& r : results) {
    all = all && r.pass;
    out << std::left << std::setw(24) << r.name << std::setw(8) << (r.pass ? "PASS" : "FAIL") << std::fixed
        << std::setprecision(2) << r.seconds << std::defaultfloat << '\n';
    for (const auto& d : r.details) out << "    " << d << '\n';
  }
  if (cfg.json_path) {
    json arr = json::array();
    for (const auto& r : results)
      arr.push_back({{"check", r.name}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
    ensure_parent(*cfg.json_path);
    std::ofstream js(*cfg.json_path);
    if (!js) throw data_error("cannot write " + *cfg.json_path);
    js << json{{"version", kVersion}, {"seed", cfg.options.seed}, {"all_pass", all}, {"checks", arr}}.dump(2)
       << '\n';
  }
  if (!all) {
    out << "failed:";
    for (const auto& r : results)
      if (!r.pass) out << ' ' << r.name;
    out << '\n';
  }
  return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gendata

int cmd_gendata(const GendataConfig& cfg, std::ostream& out) {
  const auto train = make_sparse_classification(cfg.train, cfg.teacher_seed);
  SparseClassificationSpec ts = cfg.train;
  ts.samples = cfg.test_samples;
  ts.seed = cfg.train.seed + 0x1000;
  const auto test = make_sparse_classification(ts, cfg.teacher_seed);
  const std::string tp = output_path(cfg.output_dir, cfg.train_path);
  const std::string sp = output_path(cfg.output_dir, cfg.test_path);
  ensure_parent(tp);
  ensure_parent(sp);
  write_libsvm(tp, train);
  write_libsvm(sp, test);
  out << "wrote " << train.size() << " samples to " << tp << " and " << test.size() << " to " << sp << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

const char* error_kind(const error& e) {
  if (dynamic_cast<const parse_error*>(&e)) return "parse";
  if (dynamic_cast<const data_error*>(&e)) return "data";
  if (dynamic_cast<const divergence_error*>(&e)) return "divergence";
  if (dynamic_cast<const step_size_error*>(&e)) return "step_size";
  if (dynamic_cast<const numeric_error*>(&e)) return "numeric";
  if (dynamic_cast<const contract_error*>(&e)) return "contract";
  if (dynamic_cast<const structural_error*>(&e)) return "structural";
  return "error";
}

/// Run-config flags shared by train and eval; each one overrides its JSON key.
struct RunFlags {
  std::string config, preset, data, test, algorithm, loss, schedule, t0, checkpoints, output_dir, metrics, snapshot,
      label_map;
  double lambda = 0, M = 0;
  std::size_t dim = 0, m_prefix = 0;
  std::uint64_t warmup = 0, passes = 0, seed = 0;
  bool bias = false, no_timing = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool train) {
    opts["config"] = app->add_option("-c,--config", config, "JSON run config");
    opts["preset"] = app->add_option("--preset", preset, "benchmark preset (covtype, rcv1, ...)");
    opts["data"] = app->add_option("--data", data, "training file (libsvm, optionally gzipped)");
    opts["test"] = app->add_option("--test", test, "test file");
    opts["dim"] = app->add_option("--dim", dim, "feature dimension");
    opts["bias"] = app->add_flag("--bias", bias, "append a constant bias feature");
    opts["label_map"] = app->add_option("--label-map", label_map, "signs | passthrough | JSON object");
    opts["m_prefix"] = app->add_option("--m-prefix", m_prefix, "samples used to estimate M");
    if (!train) return;
    opts["algorithm"] = app->add_option("--algorithm", algorithm, "asgd | sgd");
    opts["loss"] = app->add_option("--loss", loss, "squared | hinge | l2svm | logistic");
    opts["lambda"] = app->add_option("--lambda", lambda, "L2 regularization");
    opts["schedule"] = app->add_option("--schedule", schedule, "auto | gamma0,a,c");
    opts["t0"] = app->add_option("--t0", t0, "averaging start step, or 'detect'");
    opts["M"] = app->add_option("--M", M, "max squared norm used by the auto schedule");
    opts["warmup"] = app->add_option("--warmup", warmup, "detector warmup steps");
    opts["checkpoints"] = app->add_option("--checkpoints", checkpoints, "points per pass, or a list a,b,c");
    opts["no_timing"] = app->add_flag("--no-timing", no_timing, "write 0 in the seconds column");
    opts["passes"] = app->add_option("--passes", passes, "passes over the data");
    opts["seed"] = app->add_option("--seed", seed, "seed recorded in the header");
    opts["output_dir"] = app->add_option("-o,--output-dir", output_dir, "output directory");
    opts["metrics"] = app->add_option("--metrics", metrics, "metrics CSV file name");
    opts["snapshot"] = app->add_option("--snapshot", snapshot, "model snapshot file name");
  }

  bool given(const char* name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  json merged() const {
    json j = given("config") ? read_json_file(config) : json::object();
    auto set = [&](const char* flag, const json::json_pointer& ptr, const json& v) {
      if (given(flag)) j[ptr] = v;
    };
    using P = json::json_pointer;
    set("preset", P("/preset"), preset);
    set("data", P("/data/path"), data);
    set("test", P("/test/path"), test);
    set("dim", P("/data/dim"), dim);
    set("bias", P("/data/bias"), bias);
    set("m_prefix", P("/data/m_prefix"), m_prefix);
    if (given("label_map")) {
      json lm = label_map == "signs" || label_map == "passthrough" ? json(label_map) : json::parse(label_map);
      j["/data/label_map"_json_pointer] = lm;
    }
    set("algorithm", P("/trainer/algorithm"), algorithm);
    set("loss", P("/trainer/loss"), loss);
    set("lambda", P("/trainer/lambda"), lambda);
    if (given("schedule")) j["/trainer/schedule"_json_pointer] = schedule_flag_to_json(schedule);
    if (given("t0")) j["/trainer/t0"_json_pointer] = t0 == "detect" ? json("detect") : json(std::stoull(t0));
    set("M", P("/trainer/M"), M);
    set("warmup", P("/trainer/warmup"), warmup);
    if (given("checkpoints")) j["/eval/checkpoints"_json_pointer] = checkpoints_flag_to_json(checkpoints);
    set("no_timing", P("/eval/timing"), !no_timing);
    set("passes", P("/passes"), passes);
    set("seed", P("/seed"), seed);
    set("output_dir", P("/output/dir"), output_dir);
    set("metrics", P("/output/metrics"), metrics);
    set("snapshot", P("/output/snapshot"), snapshot);
    return j;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Averaged SGD for linear models: training, evaluation and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "train one model on a libsvm file");
  train_flags.add(train, true);

  RunFlags eval_flags;
  std::string snapshot_path;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model snapshot on a libsvm file");
  eval->add_option("snapshot", snapshot_path, "snapshot written by train")->required();
  eval_flags.add(eval, false);

  SyntheticConfig syn;
  std::string syn_config;
  std::uint64_t syn_steps = 0;
  CLI::App* synthetic = app.add_subcommand("synthetic", "run the synthetic reproductions");
  synthetic->add_option("problem", syn.which, "toy1 | toy2")->required();
  auto* syn_config_opt = synthetic->add_option("-c,--config", syn_config, "JSON config");
  auto* syn_seeds = synthetic->add_option("--seeds", syn.seeds, "replicates");
  auto* syn_steps_opt = synthetic->add_option("--steps", syn_steps, "samples per replicate");
  auto* syn_seed = synthetic->add_option("--seed", syn.seed, "base seed");
  auto* syn_points = synthetic->add_option("--points", syn.points, "geometric checkpoints");
  auto* syn_threads = synthetic->add_option("--threads", syn.threads, "worker threads (0 = all cores)");
  auto* syn_dir = synthetic->add_option("-o,--output-dir", syn.output_dir, "output directory");
  auto* syn_out = synthetic->add_option("--output", syn.output, "CSV file name");

  VerifyConfig ver;
  std::string ver_config, ver_schedule, ver_json;
  bool ver_quick = false;
  CLI::App* verify = app.add_subcommand("verify", "run the theory verification suite");
  auto* ver_config_opt = verify->add_option("-c,--config", ver_config, "JSON config");
  auto* ver_seed = verify->add_option("--seed", ver.options.seed, "base seed");
  auto* ver_threads = verify->add_option("--threads", ver.options.threads, "worker threads (0 = all cores)");
  verify->add_flag("--quick", ver_quick, "smaller replicate counts");
  auto* ver_sched = verify->add_option("--theorem1-schedule", ver_schedule, "override schedule gamma0,a,c");
  auto* ver_json_opt = verify->add_option("--json", ver_json, "also write a JSON report");

  GendataConfig gen;
  CLI::App* gendata = app.add_subcommand("gendata", "write a synthetic sparse classification dataset");
  gendata->add_option("--dim", gen.train.dim, "features");
  gendata->add_option("--nnz", gen.train.nnz, "nonzeros per sample");
  gendata->add_option("--samples", gen.train.samples, "training samples");
  gendata->add_option("--test-samples", gen.test_samples, "test samples");
  gendata->add_option("--noise", gen.train.label_noise, "label flip probability");
  gendata->add_option("--seed", gen.train.seed, "sample seed");
  gendata->add_option("--teacher-seed", gen.teacher_seed, "seed of the separating hyperplane");
  gendata->add_option("--train", gen.train_path, "training file name (.gz compresses)");
  gendata->add_option("--test", gen.test_path, "test file name");
  auto* gen_dir = gendata->add_option("-o,--output-dir", gen.output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(parse_run_config(train_flags.merged()), out);
    if (eval->parsed()) {
      json j = eval_flags.merged();
      // The eval file is the test set; "data" is accepted as an alias.
      if (j.contains("test") == false && j.contains("data")) j["test"] = j["data"];
      return cmd_eval(snapshot_path, parse_run_config(j), out);
    }
    if (synthetic->parsed()) {
      if (syn_config_opt->count()) {
        const json j = read_json_file(syn_config);
        reject_unknown(j, {"problem", "seeds", "steps", "seed", "points", "threads", "output_dir", "output"},
                       "synthetic config");
        auto take = [&](const char* key, CLI::Option* flag, auto& field) {
          if (j.contains(key) && !flag->count()) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        take("seeds", syn_seeds, syn.seeds);
        take("seed", syn_seed, syn.seed);
        take("points", syn_points, syn.points);
        take("threads", syn_threads, syn.threads);
        take("output_dir", syn_dir, syn.output_dir);
        take("output", syn_out, syn.output);
        if (j.contains("steps") && !syn_steps_opt->count()) syn.steps = j.at("steps").get<std::uint64_t>();
      }
      if (syn_steps_opt->count()) syn.steps = syn_steps;
      if (!syn_dir->count() && syn.output_dir == ".") syn.output_dir = resolve_output_dir(std::nullopt);
      return cmd_synthetic(syn, out);
    }
    if (verify->parsed()) {
      theory::VerifyOptions& o = ver.options;
      if (ver_quick) {
        o.theorem1_seeds = 50;
        o.theorem1_checkpoints = {100, 1000};
        o.divergence_steps = 20000;
        o.xi2_thetas = 5;
        o.xi2_draws = 20000;
      }
      if (ver_config_opt->count()) {
        const json j = read_json_file(ver_config);
        reject_unknown(j,
                       {"seed", "threads", "theorem1_seeds", "theorem1_checkpoints", "theorem1_schedule",
                        "sandwich_cases", "divergence_M", "divergence_seeds", "divergence_steps", "xi2_thetas",
                        "xi2_draws", "json"},
                       "verify config");
        if (j.contains("seed") && !ver_seed->count()) o.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads") && !ver_threads->count()) o.threads = j.at("threads").get<unsigned>();
        if (j.contains("theorem1_seeds")) o.theorem1_seeds = j.at("theorem1_seeds").get<std::size_t>();
        if (j.contains("theorem1_checkpoints"))
          o.theorem1_checkpoints = j.at("theorem1_checkpoints").get<std::vector<std::uint64_t>>();
        if (j.contains("theorem1_schedule")) o.theorem1_schedule = parse_schedule(j.at("theorem1_schedule"));
        if (j.contains("sandwich_cases")) o.sandwich_cases = j.at("sandwich_cases").get<std::size_t>();
        if (j.contains("divergence_M")) o.divergence_M = j.at("divergence_M").get<double>();
        if (j.contains("divergence_seeds")) o.divergence_seeds = j.at("divergence_seeds").get<std::size_t>();
        if (j.contains("divergence_steps")) o.divergence_steps = j.at("divergence_steps").get<std::uint64_t>();
        if (j.contains("xi2_thetas")) o.xi2_thetas = j.at("xi2_thetas").get<std::size_t>();
        if (j.contains("xi2_draws")) o.xi2_draws = j.at("xi2_draws").get<std::uint64_t>();
        if (j.contains("json") && !ver_json_opt->count()) ver.json_path = j.at("json").get<std::string>();
      }
      if (ver_sched->count()) {
        const json s = schedule_flag_to_json(ver_schedule);
        if (!s.is_object()) throw contract_error("--theorem1-schedule expects gamma0,a,c");
        // Deliberately unchecked: an inadmissible schedule must reach the check.
        o.theorem1_schedule = Schedule{s["gamma0"].get<double>(), s["a"].get<double>(), s["c"].get<double>()};
      }
      if (ver_json_opt->count()) ver.json_path = ver_json;
      return cmd_verify(ver, out);
    }
    if (gendata->parsed()) {
      if (!gen_dir->count()) gen.output_dir = resolve_output_dir(std::nullopt);
      return cmd_gendata(gen, out);
    }
  } catch (const error& e) {
    err << "error[" << error_kind(e) << "]: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error[config]: bad number: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace asgd::cli
