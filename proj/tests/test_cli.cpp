#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrmr/cli.hpp"
#include "lrmr/datagen.hpp"
#include "lrmr/io.hpp"

namespace lrmr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("lrmr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  static std::size_t line_count(const std::string& file) {
    std::ifstream in(file);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
  }

  fs::path dir;
};

TEST_F(CliTest, GenerateSquare) {
  const CliRun r = run({"generate", "--shape", "square", "--g", "64", "--n", "500", "--noise", "gaussian:1", "--seed",
                     "7", "--out", path("d.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(path("d.txt")), 501u);
  const Coefficients truth = load_coefficients(path("d.txt.truth"));
  EXPECT_EQ(numerical_rank(truth.C), 1);
  EXPECT_EQ(truth.gamma, Vector::Ones(5));
  EXPECT_NE(r.out.find("500 samples"), std::string::npos);
}

TEST_F(CliTest, GenerateSyntheticLogistic) {
  const CliRun r = run({"generate", "--synthetic", "m=64,q=64,r=5,s=0.05", "--model", "logistic", "--noise", "none",
                     "--n", "500", "--out", path("l.txt"), "--truth", path("l.truth")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Dataset d = load_dataset(path("l.txt"));
  EXPECT_EQ(d.model().kind, LossKind::Logistic);
  EXPECT_TRUE(((d.y().array() == 0.0) || (d.y().array() == 1.0)).all());
  EXPECT_LE(numerical_rank(load_coefficients(path("l.truth")).C), 5);
}

TEST_F(CliTest, GenerateParseIdentity) {
  ASSERT_EQ(run({"generate", "--shape", "cross", "--g", "8", "--n", "30", "--noise", "contaminated:0.1", "--seed",
                 "3", "--out", path("c.txt")})
                .code,
            0);
  SimulationSpec sim;
  sim.signal = ShapeSpec{ShapeKind::Cross, 8};
  sim.noise = ContaminatedNoise{0.1, 1.0, 100.0};
  const Coefficients truth = make_truth(sim, stream_seed(3, 0));
  const Dataset expected = sample_dataset(truth.C, truth.gamma, 30, sim.noise, sim.model, stream_seed(3, 1));
  EXPECT_TRUE(load_dataset(path("c.txt")) == expected);
}

TEST_F(CliTest, FitNoiselessRecovery) {
  ASSERT_EQ(run({"generate", "--shape", "square", "--g", "8", "--n", "120", "--noise", "none", "--out",
                 path("d.txt")})
                .code,
            0);
  const CliRun r = run({"fit", "--data", path("d.txt"), "--truth", path("d.txt.truth"), "--rank", "1", "--lambda", "0",
                     "--eps", "1e-14", "--max-iter", "5000", "--trace", "--coef-out", path("est.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LE(j["rmse_C"].get<double>(), 1e-3);
  const auto trace = j["objective_trace"].get<std::vector<double>>();
  EXPECT_EQ(trace.size(), j["iterations"].get<std::size_t>() + 1);
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1] + 1e-12);
  for (const char* key : {"rmse_C", "rmse_gamma", "prediction_error", "objective_trace", "iterations",
                          "termination", "lambda", "rank", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(load_coefficients(path("est.txt")).C.rows(), 8);
}

TEST_F(CliTest, FitWithoutTruthHasNullRmse) {
  ASSERT_EQ(run({"generate", "--shape", "square", "--g", "8", "--n", "60", "--out", path("d.txt")}).code, 0);
  const CliRun r = run({"fit", "--data", path("d.txt"), "--model", "robust", "--alpha", "2", "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path("r.json"));
  const json j = json::parse(in);
  EXPECT_TRUE(j["rmse_C"].is_null());
  EXPECT_LE(j["objective_trace"].size(), 2u);
}

TEST_F(CliTest, MissingDatasetNoPartialOutput) {
  const CliRun r = run({"fit", "--data", path("missing.txt"), "--out", path("out.json")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(path("out.json")));
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("missing.txt"), std::string::npos);
}

TEST_F(CliTest, ParseErrorNamesLine) {
  std::ofstream(path("bad.txt")) << "1 2 0 ordinary\n1 2 3\n1 2 oops\n";
  const CliRun r = run({"fit", "--data", path("bad.txt")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(CliTest, TuneAndInitOptions) {
  ASSERT_EQ(run({"generate", "--shape", "square", "--g", "8", "--n", "80", "--out", path("d.txt")}).code, 0);
  const CliRun r = run({"fit", "--data", path("d.txt"), "--tune", "--folds", "3", "--lambda-grid", "0,1,10", "--init",
                     "ls"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double lambda = json::parse(r.out)["lambda"].get<double>();
  EXPECT_TRUE(lambda == 0.0 || lambda == 1.0 || lambda == 10.0);
}

TEST_F(CliTest, ExperimentSingleRepAndDeterminism) {
  const std::vector<std::string> args{"experiment", "--shape", "square", "--g", "8", "--n", "60", "--reps", "1",
                                      "--lambda-grid", "0,1", "--seed", "4"};
  const CliRun a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const json j = json::parse(a.out);
  EXPECT_EQ(j["rmse_C"]["std"].get<double>(), 0.0);
  EXPECT_EQ(j["completed"].get<int>(), 1);
  EXPECT_EQ(run(args).out, a.out);
}

TEST_F(CliTest, CheckCurvature) {
  const CliRun r = run({"check", "curvature", "--m", "20", "--q", "15", "--r", "3", "--trials", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["pass"].get<bool>());
}

TEST_F(CliTest, CheckAssumptionsAndDescentOnFiles) {
  ASSERT_EQ(run({"generate", "--shape", "square", "--g", "8", "--n", "400", "--out", path("d.txt")}).code, 0);
  const CliRun a = run({"check", "assumptions", "--data", path("d.txt"), "--truth", path("d.txt.truth"), "--c0", "0.3"});
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = json::parse(a.out);
  EXPECT_LE(ja["c2_hat"].get<double>(), ja["c3_hat"].get<double>());
  const CliRun d = run({"check", "descent", "--data", path("d.txt"), "--truth", path("d.txt.truth"), "--trials", "50"});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_TRUE(json::parse(d.out)["pass"].get<bool>());
}

TEST_F(CliTest, CheckCapacityGuardNamed) {
  const CliRun r = run({"check", "assumptions", "--shape", "square", "--g", "64", "--n", "10"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("capacity"), std::string::npos);
}

TEST_F(CliTest, CheckRateReportsSlope) {
  const CliRun r = run({"check", "rate", "--g", "8", "--n-list", "100,200,400", "--reps", "3"});
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.contains("slope"));
  EXPECT_EQ(r.code, j["pass"].get<bool>() ? 0 : 1);
}

TEST_F(CliTest, InvalidSubcommand) {
  const CliRun r = run({"check", "entropy"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("usage"), std::string::npos);
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
}

TEST_F(CliTest, ConfigFileAndOverride) {
  std::ofstream(path("gen.cfg")) << "# generation\nshape = cross\ng = 8\nn = 25\nseed = 2\nout = " << path("a.txt")
                                 << "\n";
  ASSERT_EQ(run({"generate", "--config", path("gen.cfg")}).code, 0);
  EXPECT_EQ(load_dataset(path("a.txt")).n(), 25);
  ASSERT_EQ(run({"generate", "--config", path("gen.cfg"), "--n", "12"}).code, 0);
  EXPECT_EQ(load_dataset(path("a.txt")).n(), 12);
}

TEST_F(CliTest, ConfigUnknownKey) {
  std::ofstream(path("bad.cfg")) << "n = 10\nbogus = 1\n";
  const CliRun r = run({"generate", "--config", path("bad.cfg"), "--out", path("x.txt")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(CliTest, ConfigForNestedCommand) {
  std::ofstream(path("curv.cfg")) << "m = 6\nq = 5\nr = 2\ntrials = 50\n";
  const CliRun r = run({"check", "curvature", "--config", path("curv.cfg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["trials"].get<int>(), 50);
}

TEST_F(CliTest, CvCommand) {
  ASSERT_EQ(run({"generate", "--shape", "square", "--g", "8", "--n", "40", "--out", path("d.txt")}).code, 0);
  const CliRun r = run({"cv", "--data", path("d.txt"), "--folds", "4", "--inner-folds", "3", "--lambda-grid", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["fold_errors"].size(), 4u);
}

}  // namespace
}  // namespace lrmr
