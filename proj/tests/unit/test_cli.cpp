#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace asgd;
using namespace asgd::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "asgd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("asgd_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kOutputDirEnv);
  }
  void TearDown() override {
    unsetenv(kOutputDirEnv);
    fs::remove_all(dir_);
  }

  void gendata(std::size_t samples = 3000) {
    const auto r = run({"gendata", "--dim", "200", "--nnz", "10", "--samples", std::to_string(samples),
                        "--test-samples", "500", "-o", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, TrainThenEvalReproducesFinalRow) {
  gendata();
  const auto t = run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--lambda", "1e-4",
                      "--no-timing", "-o", dir_.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string csv = slurp(dir_ / "metrics.csv");
  EXPECT_NE(csv.find("# algorithm=asgd"), std::string::npos);
  EXPECT_NE(csv.find("step,passes,model"), std::string::npos) << csv.substr(0, 600);

  const auto e = run({"eval", p("model.json"), "--test", p("test.svm")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out.rfind("model,error_rate,cost\n", 0), 0u);

  // The final theta_bar row of the CSV carries the same error rate and cost.
  std::istringstream lines(e.out);
  std::string header, theta_line, bar_line;
  std::getline(lines, header);
  std::getline(lines, theta_line);
  std::getline(lines, bar_line);
  const std::string bar_rest = bar_line.substr(bar_line.find(',') + 1);
  EXPECT_NE(csv.find(",theta_bar," + bar_rest + ","), std::string::npos)
      << bar_line << "\n" << csv;
}

TEST_F(CliTest, NoTimingRunsAreByteIdentical) {
  gendata(1000);
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto t = run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--lambda", "1e-3", "--no-timing", "-o",
                        dir_.string(), "--metrics", name, "--snapshot", std::string(name) + ".json"});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(slurp(dir_ / "a.csv.json"), slurp(dir_ / "b.csv.json"));
}

TEST_F(CliTest, AutoScheduleFromPresetM) {
  gendata(500);
  const auto t = run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--preset", "covtype", "--dim", "200", "--no-timing",
                      "-o", dir_.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string csv = slurp(dir_ / "metrics.csv");
  // covtype: λ = 1e-6, M = 6.8, l2svm → γ0 = 1/6.8, c = 3/4
  EXPECT_NE(csv.find("# schedule=auto gamma0=0.14705882352941177 a=9.9999999999999995e-07 c=0.75"), std::string::npos)
      << csv.substr(0, 800);
  EXPECT_NE(csv.find("# t0_source=fixed"), std::string::npos);
}

TEST_F(CliTest, ExplicitScheduleAndCheckpointList) {
  gendata(400);
  const auto t = run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--schedule", "0.5,0.001,0.75", "--checkpoints",
                      "10,100,400", "--t0", "5", "--algorithm", "sgd", "--no-timing", "-o", dir_.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string csv = slurp(dir_ / "metrics.csv");
  std::size_t rows = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#' && line.rfind("step", 0) != 0) ++rows;
  EXPECT_EQ(rows, 3u);  // SGD baseline writes theta rows only
}

TEST_F(CliTest, ZeroCheckpointsStillWritesFinalRecord) {
  gendata(300);
  const auto t =
      run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--lambda", "1e-3", "--checkpoints", "0", "--no-timing", "-o", dir_.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string csv = slurp(dir_ / "metrics.csv");
  EXPECT_NE(csv.find("\n300,1,theta,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n300,1,theta_bar,"), std::string::npos) << csv;
}

TEST_F(CliTest, OutputDirFromEnvironment) {
  gendata(300);
  const fs::path env_dir = dir_ / "from_env";
  fs::create_directories(env_dir);
  setenv(kOutputDirEnv, env_dir.c_str(), 1);
  const auto t = run({"train", "--data", p("train.svm"), "--test", p("test.svm"), "--lambda", "1e-3", "--no-timing"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(env_dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(env_dir / "model.json"));
}

TEST_F(CliTest, JsonConfigWithFlagOverride) {
  gendata(300);
  std::ofstream(dir_ / "run.json") << R"({"data": {"path": ")" << p("train.svm")
                                   << R"("}, "test": {"path": ")" << p("test.svm") << R"("}, "trainer": {"lambda": 0.01, "loss": "logistic"},
                                      "eval": {"timing": false}, "output": {"dir": ")"
                                   << dir_.string() << R"("}})";
  const auto t = run({"train", "-c", p("run.json"), "--lambda", "0.001"});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string csv = slurp(dir_ / "metrics.csv");
  EXPECT_NE(csv.find("# lambda=0.001\n"), std::string::npos) << csv.substr(0, 800);
  EXPECT_NE(csv.find("# loss=logistic\n"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  std::ofstream(dir_ / "bad.json") << R"({"data": {"path": "x"}, "trainer": {"lamda": 0.1}})";
  const auto a = run({"train", "-c", p("bad.json")});
  EXPECT_EQ(a.code, 2);
  EXPECT_NE(a.err.find("lamda"), std::string::npos) << a.err;

  const auto b = run({"train", "--data", p("nope.svm"), "--test", p("nope.svm"), "--lambda", "1"});
  EXPECT_EQ(b.code, 2);
  EXPECT_NE(b.err.find("error[data]"), std::string::npos) << b.err;

  EXPECT_EQ(run({"train", "--data", p("x"), "--preset", "no-such-set"}).code, 2);
  EXPECT_EQ(run({"train", "--data", p("x"), "--loss", "huber"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, DimMismatchIsDataError) {
  std::ofstream(dir_ / "d.svm") << "1 1:1\n-1 50:1\n";
  const auto r = run({"train", "--data", p("d.svm"), "--test", p("d.svm"), "--lambda", "1", "--dim", "10", "-o", dir_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error[data]"), std::string::npos) << r.err;
}

TEST_F(CliTest, VerifyNamesFailedCheckForInadmissibleSchedule) {
  std::ofstream(dir_ / "v.json") << R"({"theorem1_seeds": 4, "theorem1_checkpoints": [10], "sandwich_cases": 2,
                                        "divergence_seeds": 1, "divergence_steps": 2000, "xi2_thetas": 1,
                                        "xi2_draws": 1000})";
  const auto ok = run({"verify", "-c", p("v.json")});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;

  const auto bad = run({"verify", "-c", p("v.json"), "--theorem1-schedule", "5,0.01,0.6667"});
  EXPECT_EQ(bad.code, 1) << bad.out << bad.err;
  EXPECT_NE(bad.out.find("failed: theorem1_bound"), std::string::npos) << bad.out;
}

TEST_F(CliTest, SyntheticWritesCsv) {
  const auto r = run({"synthetic", "toy1", "--seeds", "2", "--steps", "200", "--points", "4", "-o", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "synthetic.csv");
  EXPECT_NE(csv.find("step,arm,excess_risk,std_error"), std::string::npos);
  EXPECT_NE(csv.find("# arm.asgd=gamma0=1 a=0.02"), std::string::npos) << csv.substr(0, 500);
  EXPECT_EQ(run({"synthetic", "toy3"}).code, 2);
}

TEST(Config, PresetFillsUnsetFields) {
  const RunConfig c = parse_run_config(json::parse(R"({"preset": "rcv1", "data": {"path": "x"}})"));
  const Preset* pr = find_preset("rcv1");
  ASSERT_NE(pr, nullptr);
  EXPECT_EQ(c.trainer.lambda, pr->lambda);
  EXPECT_EQ(c.trainer.M, pr->M);
  EXPECT_EQ(c.data.dim, pr->dim);
  const RunConfig d = parse_run_config(
      json::parse(R"({"preset": "rcv1", "data": {"path": "x"}, "trainer": {"lambda": 0.5, "t0": "detect"}})"));
  EXPECT_EQ(d.trainer.lambda, 0.5);
  EXPECT_FALSE(d.trainer.t0.has_value());
}

TEST(Config, ResolveSchedule) {
  TrainerConfig t;
  t.loss = LossKind::squared;
  t.lambda = 0.01;
  EXPECT_EQ(resolve_schedule(t, 4.0), Schedule::make(0.25, 0.01, 2.0 / 3.0));
  t.algorithm = Algorithm::sgd;
  EXPECT_EQ(resolve_schedule(t, 4.0), Schedule::make(0.25, 0.01, 1.0));
  t.M = 2.0;
  EXPECT_EQ(resolve_schedule(t, 4.0).gamma0, 0.5);
  t.schedule = Schedule::make(0.1, 0.0, 0.5);
  EXPECT_EQ(resolve_schedule(t, 4.0), *t.schedule);
}

TEST(Config, OutputPath) {
  EXPECT_EQ(output_path("out", "m.csv"), "out/m.csv");
  EXPECT_EQ(output_path("out", "/abs/m.csv"), "/abs/m.csv");
}
