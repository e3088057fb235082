// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// limit. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asgd/asgd.hpp"
#include "asgd/theory.hpp"
#include "commands.hpp"

using namespace asgd;
using namespace asgd::theory;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

constexpr std::uint64_t kSeed = 20090101;

// ---------------------------------------------------------------------------

Outcome ac1() {
  VerifyOptions o;
  o.seed = kSeed;
  const LinearSaConfig cfg = make_theorem1_case(o);
  const Theorem1Report rep = verify_theorem1(cfg, 200, {100, 1000, 10000});
  std::string d = "cond=" + fmt("%.4g", rep.params.lambda1 / rep.params.lambda0);
  for (const auto& r : rep.rows)
    d += fmt(" | t=%.0f est=%.4g se=%.2g bound=%.4g", static_cast<double>(r.t), r.estimate, r.std_error, r.bound);
  return {rep.pass, d};
}

Outcome ac2() {
  Rng rng(kSeed);
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    const SandwichCase sc = random_sandwich_case(rng, 8, 500);
    const SandwichResult r = psd_sandwich(sc.A, sc.schedule, sc.j, sc.t);
    worst = std::min({worst, r.lower_gap_min_eig, r.upper_gap_min_eig});
    ok = ok && r.lower_gap_min_eig >= -1e-10 && r.upper_gap_min_eig >= -1e-10;
  }
  return {ok, fmt("20 cases, smallest gap eigenvalue %.3g", worst)};
}

// Dense oracle for AC-3: θ ← (1 − λγ)θ − γ L'(θᵀx, y) x, θ̄ uniform over θ_{t0+1..t}.
struct DenseOracle {
  DenseVector theta, bar;
  Schedule s;
  double lambda;
  LossKind loss;
  std::optional<std::uint64_t> t0;
  std::uint64_t t = 0;

  void step(const Sample& x) {
    ++t;
    const double g = rate(s, t);
    double score = 0.0;
    for (const auto& f : x.features.entries()) score += f.value * theta[f.index];
    const double d = loss_deriv(loss, score, x.label);
    const double shrink = 1.0 - lambda * g;
    for (auto& w : theta) w *= shrink;
    for (const auto& f : x.features.entries()) theta[f.index] -= g * d * f.value;
    if (t0 && t > *t0) {
      const double eta = 1.0 / static_cast<double>(t - *t0);
      for (std::size_t i = 0; i < theta.size(); ++i) bar[i] += eta * (theta[i] - bar[i]);
    } else {
      bar = theta;
    }
  }
};

double rel_err(const DenseVector& a, const DenseVector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::vector<Sample> sparse_stream(std::uint64_t seed, std::size_t n, std::size_t dim) {
  SparseClassificationSpec spec;
  spec.dim = dim;
  spec.nnz = 20;
  spec.samples = n;
  spec.label_noise = 0.1;
  spec.seed = seed;
  auto data = make_sparse_classification(spec, seed + 1000);
  // nnz ≈ 20: drop a random 0..5 features per sample
  std::mt19937_64 rng(seed);
  for (auto& s : data) {
    auto f = std::vector<Feature>(s.features.entries().begin(), s.features.entries().end());
    f.resize(f.size() - rng() % 6);
    s.features = SparseVector(std::move(f), dim);
  }
  return data;
}

struct Touches {
  static inline std::uint64_t count = 0;
};

class CountingVector {
 public:
  CountingVector(std::size_t n, double v) : v_(n, v) {}
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) {
    ++Touches::count;
    return v_[i];
  }
  const double& operator[](std::size_t i) const {
    ++Touches::count;
    return v_[i];
  }

 private:
  std::vector<double> v_;
};

Outcome ac3() {
  const std::size_t dim = 10000, steps = 10000;
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto data = sparse_stream(kSeed + k, steps, dim);
    AsgdOptions o;
    o.loss = k % 3 == 2 ? LossKind::logistic : LossKind::squared_hinge;
    o.lambda = k % 2 ? 1e-3 : 0.0;
    o.schedule = Schedule::make(0.5, o.lambda > 0 ? o.lambda : 1e-3, 0.75);
    // even streams use the detector, odd ones a fixed start
    if (k % 2) o.fixed_t0 = 100 * k;
    AsgdTrainer asgd(dim, o);
    DenseOracle dense{DenseVector(dim, 0.0), DenseVector(dim, 0.0), o.schedule, o.lambda, o.loss, o.fixed_t0};
    std::mt19937_64 rng(kSeed ^ k);
    std::set<std::uint64_t> anchors;
    while (anchors.size() < 5) anchors.insert(rng() % steps);
    for (std::size_t i = 0; i < steps; ++i) {
      asgd.step(data[i]);
      dense.step(data[i]);
      if (!dense.t0 && asgd.t0()) dense.t0 = asgd.t0();
      if (anchors.count(i)) asgd.re_anchor();
    }
    const auto [theta, bar] = asgd.recover();
    const double e = std::max(rel_err(theta.weights, dense.theta), rel_err(bar.weights, dense.bar));
    worst = std::max(worst, e);
    ok = ok && e <= 1e-8 && asgd.t0() == dense.t0 && asgd.averaged_steps() > 0;
  }

  // Touch count per step once averaging runs, at two dimensions.
  std::uint64_t max_per_step[2] = {0, 0};
  double max_ratio = 0.0;
  const std::size_t dims[2] = {10000, 1000000};
  for (int i = 0; i < 2; ++i) {
    const auto data = sparse_stream(kSeed, 2000, dims[i]);
    AsgdOptions o;
    o.lambda = 1e-3;
    o.schedule = Schedule::make(0.5, 1e-3, 0.75);
    o.fixed_t0 = 10;
    BasicAsgdTrainer<CountingVector> asgd(dims[i], o);
    for (const auto& s : data) {
      const auto before = Touches::count;
      asgd.step(s);
      if (asgd.averaged_steps() > 1) {
        const auto n = Touches::count - before;
        max_per_step[i] = std::max(max_per_step[i], n);
        max_ratio = std::max(max_ratio, static_cast<double>(n) / static_cast<double>(s.features.nnz()));
      }
    }
  }
  const bool touches_ok = max_ratio <= 6.0;
  return {ok && touches_ok,
          fmt("max relative error %.3g; touches/step <= %.1f x nnz (max %.0f at dim 1e4, %.0f at dim 1e6)", worst,
              max_ratio, static_cast<double>(max_per_step[0]), static_cast<double>(max_per_step[1]))};
}

Outcome ac4() {
  ExperimentOptions o;
  o.seeds = 10;
  o.steps = 10000;
  o.base_seed = kSeed;
  const auto r = run_toy1(o);
  const double asgd = r.final_excess("asgd"), bad = r.final_excess("asgd_bad"), sgd = r.final_excess("sgd"),
               batch = r.final_excess("batch");
  const bool ok = asgd <= 3.0 * batch && bad >= 10.0 * asgd && asgd < sgd;
  return {ok, fmt("asgd %.4g, asgd_bad %.4g, sgd %.4g, batch %.4g", asgd, bad, sgd, batch) +
                  fmt(" (asgd/batch %.3g, bad/asgd %.3g)", asgd / batch, bad / asgd)};
}

Outcome ac5() {
  ExperimentOptions o;
  o.seeds = 10;
  o.steps = 100000;
  o.base_seed = kSeed;
  const auto r = run_toy2(o);
  const double asgd = r.final_excess("asgd"), sgd = r.final_excess("sgd"), batch = r.final_excess("batch");
  const bool ok = sgd >= 10.0 * asgd && asgd <= 2.0 * batch;
  return {ok, fmt("asgd %.4g, sgd %.4g, batch %.4g (sgd/asgd %.3g", asgd, sgd, batch, sgd / asgd) +
                  fmt(", asgd/batch %.3g)", asgd / batch)};
}

Outcome ac6() {
  const double M = 10.0;
  bool ok = true;
  std::uint64_t slowest = 0;
  double max_low = 0.0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto hi = divergence_check(M, 2.4 / M, 100000, kSeed ^ i);
    const auto lo = divergence_check(M, 0.5 / M, 100000, kSeed ^ i);
    ok = ok && hi.outcome == DivergenceOutcome::diverged && hi.final_norm > 1e6 &&
         lo.outcome == DivergenceOutcome::bounded && lo.max_norm < 1e3;
    slowest = std::max(slowest, hi.steps_run);
    max_low = std::max(max_low, lo.max_norm);
  }
  return {ok, fmt("2.4/M diverged on all seeds within %.0f steps; 0.5/M max norm %.4g",
                  static_cast<double>(slowest), max_low)};
}

Outcome ac7() {
  const SyntheticProblem p = make_regression_toy(kSeed);
  const auto rep = xi2_bound_check(p, random_thetas(p, 20, kSeed), 100000, kSeed);
  double worst = 0.0;
  for (const auto& r : rep.rows) worst = std::max(worst, r.ratio);
  return {rep.pass, fmt("M=%.5g, rejections %.0f, largest estimate/bound %.4g", rep.M,
                        static_cast<double>(rep.rejections), worst)};
}

Outcome ac8() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> score(-4.0, 4.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (LossKind k : {LossKind::squared, LossKind::squared_hinge, LossKind::logistic}) {
    for (int n = 0; n < 1000;) {
      const double s = score(rng), y = rng() % 2 ? 1.0 : -1.0;
      if (k == LossKind::squared_hinge && std::abs(1.0 - y * s) < 1e-4) continue;  // kink
      const double fd = (loss_value(k, s + h, y) - loss_value(k, s - h, y)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - loss_deriv(k, s, y)));
      ++n;
    }
  }
  return {worst <= 1e-6, fmt("max |fd - deriv| = %.3g over 3000 points", worst)};
}

// AC-9 ----------------------------------------------------------------------

double final_error(const fs::path& csv, const std::string& model) {
  std::ifstream in(csv);
  std::string line;
  double err = std::nan("");
  const std::string tag = "," + model + ",";
  while (std::getline(in, line)) {
    const auto pos = line.find(tag);
    if (pos == std::string::npos) continue;
    const std::string rest = line.substr(pos + tag.size());
    err = std::stod(rest.substr(0, rest.find(',')));
  }
  return err;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "asgd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (rc != 0) std::fprintf(stderr, "%s%s", out.str().c_str(), err.str().c_str());
  return rc;
}

Outcome ac9() {
  const fs::path dir = fs::temp_directory_path() / "asgd_acceptance_ac9";
  fs::remove_all(dir);
  fs::create_directories(dir);

  SparseClassificationSpec spec;
  spec.samples = 100000;
  spec.seed = 1;
  auto train = make_sparse_classification(spec, 7);
  spec.samples = 20000;
  spec.seed = 2;
  const auto test = make_sparse_classification(spec, 7);
  write_libsvm((dir / "test.svm").string(), test);

  double asgd_sum = 0.0, sgd_sum = 0.0;
  std::string per_order;
  for (std::uint64_t order = 0; order < 5; ++order) {
    std::mt19937_64 rng(kSeed + order);
    std::shuffle(train.begin(), train.end(), rng);
    const std::string path = (dir / ("train" + std::to_string(order) + ".svm.gz")).string();
    write_libsvm(path, train);
    for (const char* algo : {"asgd", "sgd"}) {
      const std::string csv = std::string(algo) + std::to_string(order) + ".csv";
      const int rc = cli({"train", "--data", path, "--test", (dir / "test.svm").string(), "--algorithm", algo,
                          "--lambda", "1e-4", "--dim", "1000", "--no-timing", "--checkpoints", "5", "-o",
                          dir.string(), "--metrics", csv, "--snapshot", csv + ".json"});
      if (rc != 0) return {false, std::string("train failed for ") + algo};
    }
    const double a = final_error(dir / ("asgd" + std::to_string(order) + ".csv"), "theta_bar");
    const double s = final_error(dir / ("sgd" + std::to_string(order) + ".csv"), "theta");
    asgd_sum += a;
    sgd_sum += s;
    per_order += fmt(" %.4f/%.4f", a, s);
  }
  fs::remove_all(dir);
  const double a = asgd_sum / 5.0, s = sgd_sum / 5.0;
  return {a <= s, fmt("mean test error theta_bar %.4f vs sgd theta %.4f; per order:", a, s) + per_order};
}

struct Criterion {
  const char* id;
  double limit_seconds;  // 0: no limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"AC-1", 60, ac1}, {"AC-2", 10, ac2}, {"AC-3", 30, ac3}, {"AC-4", 60, ac4}, {"AC-5", 120, ac5},
      {"AC-6", 20, ac6}, {"AC-7", 60, ac7}, {"AC-8", 1, ac8},  {"AC-9", 0, ac9},
  };
  // optional filter: acceptance AC-3 AC-9
  const std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::string limit = c.limit_seconds > 0 ? fmt(" (limit %.0f s)", c.limit_seconds) : std::string();
    std::printf("%s %s %.2f s%s  %s%s\n", c.id, pass ? "PASS" : "FAIL", secs, limit.c_str(), o.detail.c_str(),
                in_time ? "" : "  [over time limit]");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
