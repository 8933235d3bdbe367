#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

namespace ppwave {
namespace {

namespace fs = std::filesystem;

const std::string kConfigs = PPWAVE_SAMPLE_CONFIGS;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ppwave_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string("\"") + PPWAVE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path dir_;
};

std::string config_error_path(const std::string& text) {
  try {
    (void)parse_config_text(text).model();
  } catch (const Error& e) {
    return e.path();
  }
  return "<none>";
}

TEST(Config, ReportsJsonPointerPaths) {
  const std::string base = R"("n": 5, "period": 1.0, "fourier": {"a0": 0.0, "modes": [[1.0, 0.0]]})";
  EXPECT_EQ(config_error_path("{" + base + R"(, "A": [[1,0,0],[0,1,0],[0,0,"x"]]})"), "/A/2/2");
  EXPECT_EQ(config_error_path("{" + base + R"(, "A": [[1,0,0],[0,1,0]]})"), "/A");
  EXPECT_EQ(config_error_path("{" + base + R"(, "A": [[1,0,0],[0,1,0],[0,0,1]]})"), "/A");
  EXPECT_EQ(config_error_path(R"({"n": 5, "period": 1.0, "fourier": {"a0": 0.0}, "A": [[1,0,0],[0,1,0],[0,0,-2]]})"),
            "/fourier/modes");
  EXPECT_EQ(config_error_path(R"({"period": 1.0})"), "/n");
  EXPECT_EQ(config_error_path(R"({"n": 3, "period": 1.0, "fourier": {"a0": 0.0}, "A": [[0]]})"), "/n");
  EXPECT_EQ(config_error_path("{" + base + R"(, "A": [[1,0,0],[0,1,0],[0,0,-2]], "mode": "loose"})"), "/mode");
  EXPECT_EQ(config_error_path("{" + base + R"(, "A": [[1,0,0],[0,1,0],[0,0,-2]],
      "lattice": {"generators": [{"u0": [0,0,0], "w0": [0,0]}]}})"),
            "/lattice/generators/0/w0");
  EXPECT_EQ(config_error_path("{not json"), "/");
}

TEST(Config, RoundTripsThroughCanonicalJson) {
  const RunConfig a = load_config(kConfigs + "/lattice_n5.json");
  const RunConfig b = parse_config(a.canonical());
  EXPECT_EQ(a.canonical().dump(), b.canonical().dump());
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  EXPECT_TRUE(a.model() == b.model());
  ASSERT_TRUE(a.lattice.has_value());
  EXPECT_EQ(a.lattice->size(), 4u);
}

TEST(Csv, QuotesPerRfc4180) {
  CsvTable t{{"name", "value"}, {{"plain", "1"}, {"has,comma", "say \"hi\""}, {"line\nbreak", ""}}};
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "name,value\r\nplain,1\r\n\"has,comma\",\"say \"\"hi\"\"\"\r\n\"line\nbreak\",\r\n");
}

TEST(Report, StatusFollowsChecks) {
  RunReport r("demo", "abc", 7);
  r.add_check("small", 1e-10, 1e-9);
  r.add_check("rate", 1.0, 1.0, Bound::lower);
  EXPECT_TRUE(r.passed());
  r.add_check("big", 2.0, 1.0);
  EXPECT_FALSE(r.passed());
  const Json j = r.to_json();
  EXPECT_EQ(j["status"], "fail");
  EXPECT_EQ(j["checks"][2]["status"], "fail");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_FALSE(j.contains("wall_time_s"));
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
}

TEST_F(Cli, DimsOnExampleModel) {
  const CliResult r = run("dims " + kConfigs + "/example_n5.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["result"]["dim_s"], 1);
  EXPECT_EQ(j["result"]["dim_isom0"], 8);
  EXPECT_EQ(j["result"]["multiplicities"], Json::array({2, 1}));
}

TEST_F(Cli, CurvatureOnFlatModelPasses) {
  const CliResult r = run("curvature verify " + kConfigs + "/flat_relaxed.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["status"], "pass");
}

TEST_F(Cli, HolonomyTimeGeneratorIsIdentity) {
  const CliResult r = run("holonomy compute " + kConfigs + "/lattice_n5.json --trials 5");
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  const Json j = Json::parse(r.out);
  bool found = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "k_generators_identity") {
      found = true;
      EXPECT_EQ(c["status"], "pass");
      EXPECT_LE(c["max_residual"].get<double>(), 1e-8);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(j["result"]["resolved_sign_convention"]["xi2_row"], 1);
}

TEST_F(Cli, InvalidConfigExitsTwoWithPath) {
  const fs::path cfg = write("bad.json", R"({"n": 5, "period": 1.0, "fourier": {"a0": 0.0, "modes": [[1.0, 0.0]]},
    "A": [[1,0,0],[0,1,0],[0,0,1]], "mode": "strict"})");
  const CliResult r = run("model validate " + cfg.string());
  EXPECT_EQ(r.code, 2);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"], "NonTraceless");
  EXPECT_EQ(e["path"], "/A");
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, ConstantFInStrictModeExitsTwo) {
  const fs::path cfg = write("const.json", R"({"n": 5, "period": 1.0, "fourier": {"a0": 1.0, "modes": []},
    "A": [[1,0,0],[0,1,0],[0,0,-2]], "mode": "strict"})");
  const CliResult r = run("dims " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"], "ConstantF");
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bogus " + kConfigs + "/example_n5.json").code, 2);
  EXPECT_EQ(run("dims /nonexistent/config.json").code, 2);
  EXPECT_EQ(run("geodesic probe " + kConfigs + "/example_n5.json --tol 1e-3").code, 2);
}

TEST_F(Cli, FailingCheckExitsThree) {
  const fs::path cfg = write("lat.json", R"({"n": 5, "period": 1.0, "fourier": {"a0": 0.0, "modes": [[1.0, 0.0]]},
    "A": [[1,0,0],[0,1,0],[0,0,-2]], "mode": "strict",
    "lattice": {"generators": [{"r": 0.0, "u0": [0,0,0], "w0": [1,0,0]}, {"r": 0.0, "u0": [1,0,0], "w0": [0,0,0]}]}})");
  const CliResult r = run("group verify " + cfg.string() + " --trials 20");
  EXPECT_EQ(r.code, 3) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["status"], "fail");
}

TEST_F(Cli, OutputIsByteIdenticalAcrossRuns) {
  const fs::path a = dir_ / "a.json", b = dir_ / "b.json", ca = dir_ / "a.csv", cb = dir_ / "b.csv";
  const std::string args = "group verify " + kConfigs + "/example_n5.json --seed 9 --trials 50";
  ASSERT_EQ(run(args + " --out " + a.string() + " --csv " + ca.string()).code, 0);
  ASSERT_EQ(run(args + " --out " + b.string() + " --csv " + cb.string()).code, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(ca), slurp(cb));
  EXPECT_EQ(slurp(ca).find("\r\n") != std::string::npos, true);
  const Json j = Json::parse(slurp(a));
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["fingerprint"].get<std::string>().size(), 16u);
}

TEST_F(Cli, TimingIsOptIn) {
  const CliResult r = run("dims " + kConfigs + "/example_n5.json --timing");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(Json::parse(r.out).contains("wall_time_s"));
}

}  // namespace
}  // namespace ppwave
