#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using bpcalc::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "bpcalc");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bpcalc_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string demo_config() {
  const char* path = std::getenv("BPCALC_TEST_CONFIG");
  return path ? path : "configs/demo.yaml";
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("bpcalc_cli_" + name + ".yaml");
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST(Cli, EvalFlagExample) {
  const fs::path dir = fresh_dir("eval");
  const Result r = call({"eval", "--family", "frac", "--alpha", "0.5", "--s", "-4", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "function,s_1,psi\nfrac0.5,-4,-2\n");
  EXPECT_EQ(slurp(dir / "eval.csv"), r.out);
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(Cli, UnknownCommandIsUsageError) {
  const Result r = call({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("eval, apply, subordinate, verify, membership"), std::string::npos) << r.err;
  EXPECT_EQ(call({"verify", "nonsense", "--out", fresh_dir("nonsense").string()}).code, 2);
}

TEST(Cli, MalformedConfigNamesKeyAndLine) {
  const fs::path cfg = write_config("bad", "seed: 1\nfunctions:\n  - family: frac\n    alpha: abc\n");
  const Result r = call({"eval", "--config", cfg.string(), "--out", fresh_dir("bad").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("'alpha'"), std::string::npos) << r.err;
}

TEST(Cli, AccuracyErrorExitCode) {
  // a kernel direction keeps ||T(R)x|| from decaying, so the heavy frac tail cannot be certified
  const fs::path cfg = write_config("acc", "generators:\n  matrices:\n    - [[0, 0], [0, -2]]\n");
  const Result r = call({"apply", "--config", cfg.string(), "--family", "frac", "--alpha", "0.25", "--out",
                         fresh_dir("acc").string()});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, FailingVerdictExitCode) {
  const fs::path cfg = write_config("fail",
                                    "functions:\n  - {name: log, family: log}\n"
                                    "generators:\n  matrices:\n    - [[-1, 0], [0, -2]]\n"
                                    "holomorphy:\n  samples: 2\n  times: [1.0]\n  delta: 1.0e6\n");
  // a box far beyond the admissible delta drops the integral term of the bound
  const Result r = call({"verify", "holomorphy", "--config", cfg.string(), "--out", fresh_dir("fail").string()});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("overall: FAIL"), std::string::npos);
}

TEST(Cli, LevyAgreesWithSpectralOnDemo) {
  const fs::path dir = fresh_dir("apply");
  const Result r = call({"apply", "--config", demo_config(), "--route", "levy,spectral", "--out", dir.string(), "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "apply.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "route,family,t,x_index,component,re,im,err_bound");
  std::map<std::string, std::pair<double, double>> levy, spectral;
  while (std::getline(in, line)) {
    const auto f = split(line);
    ASSERT_EQ(f.size(), 8u) << line;
    const std::string key = f[1] + "/" + f[3] + "/" + f[4];
    (f[0] == "levy" ? levy : spectral)[key] = {std::stod(f[5]), std::stod(f[6])};
  }
  ASSERT_EQ(levy.size(), spectral.size());
  ASSERT_FALSE(levy.empty());
  for (const auto& [key, v] : levy) {
    const auto w = spectral.at(key);
    EXPECT_LE(std::abs(v.first - w.first), 1e-8) << key;
    EXPECT_LE(std::abs(v.second - w.second), 1e-8) << key;
  }
}

TEST(Cli, MomentCampaignOnDemo) {
  const fs::path dir = fresh_dir("moment");
  const Result r = call({"verify", "moment", "--config", demo_config(), "--samples", "1000", "--seed", "7", "--out",
                         dir.string(), "-q"});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "verify_moment.csv");
  EXPECT_EQ(csv.find(",fail,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 1000);
  EXPECT_NE(slurp(dir / "summary.txt").find("seed: 7"), std::string::npos);
}

TEST(Cli, DeterministicArtifacts) {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  for (const fs::path& dir : {a, b}) {
    ASSERT_EQ(call({"verify", "corollary11", "--config", demo_config(), "--out", dir.string(), "-q"}).code, 0);
  }
  EXPECT_EQ(slurp(a / "verify_corollary11.csv"), slurp(b / "verify_corollary11.csv"));
  EXPECT_FALSE(slurp(a / "verify_corollary11.csv").empty());
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = fresh_dir("env");
  ::setenv("BPCALC_OUT", dir.string().c_str(), 1);
  const Result r = call({"eval", "--family", "log", "--s", "-1", "-q"});
  ::unsetenv("BPCALC_OUT");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "eval.csv"), "function,s_1,psi\nlog,-1,-0.69314718055994529\n");
}

TEST(Cli, SubordinateAndMembership) {
  const fs::path dir = fresh_dir("sub");
  Result r = call({"subordinate", "--family", "cpoisson", "--rate", "2", "--jump", "1", "--t", "1", "--out",
                   dir.string(), "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "subordinate_cpoisson_0.csv");
  EXPECT_EQ(csv.rfind("# t=1,family=cpoisson,residual=", 0), 0u);
  EXPECT_NE(csv.find("\nkind,u_1,mass\n"), std::string::npos);
  r = call({"membership", "--config", demo_config(), "--out", dir.string(), "-q"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "membership.csv").rfind("function,multi_index,min_estimate,worst_margin,status\n", 0), 0u);
}
