#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhvak/io.hpp"
#include "nhvak/systems.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("nhvak_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const nlohmann::ordered_json& j, const std::string& name = "cfg.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  Result exec(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd =
        std::string(NHVAK_BIN) + " " + args + " > " + o.string() + " 2> " + e.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
  }

  fs::path dir_;
};

nlohmann::ordered_json carriage_config(double l, double phidot) {
  return {{"version", 1},
          {"system", "carriage"},
          {"params", {{"l", l}}},
          {"initial", {{"v0_d", {0.5, phidot}}}},
          {"horizon", 4.0}};
}

}  // namespace

TEST_F(Cli, SimulateUnicycleWritesFullTrajectory) {
  const auto cfg = write_config({{"version", 1},
                                 {"system", "unicycle"},
                                 {"initial", {{"v0_d", {1.0, 0.5}}}},
                                 {"horizon", 10.0},
                                 {"step", 1e-3}});
  const Result r = exec("simulate --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "trajectory.csv"));
  ASSERT_EQ(rows.size(), 10002u);
  const auto header = split(rows[0], ',');
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.size(), 1u + 4u + 4u);
  const auto last = split(rows.back(), ',');
  EXPECT_DOUBLE_EQ(std::stod(last[0]), 10.0);
  // Rolling speed stays constant without a potential.
  const std::size_t alpha_col = 1 + 4;
  const nhvak::SystemSpec s = nhvak::build_unicycle();
  const Eigen::VectorXd v0 = s.splitting.embed_d(Eigen::Vector2d(1.0, 0.5));
  int col = -1;
  for (int i = 0; i < 4; ++i)
    if (v0(i) == 1.0) col = i;
  ASSERT_GE(col, 0);
  for (const auto& row : {rows[1], rows[5000], rows.back()})
    EXPECT_NEAR(std::stod(split(row, ',')[alpha_col + col]), 1.0, 1e-12);
}

TEST_F(Cli, ZeroHorizonGivesSingleSample) {
  const auto cfg = write_config({{"version", 1}, {"system", "heisenberg"}, {"horizon", 0.0}});
  const Result r = exec("simulate --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir_ / "trajectory.csv")).size(), 2u);
}

TEST_F(Cli, SimulateWritesMultiplierOnRequest) {
  const auto cfg = write_config({{"version", 1},
                                 {"system", "unicycle"},
                                 {"horizon", 1.0},
                                 {"output", {{"multiplier", true}}}});
  const Result r = exec("simulate --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "multiplier.csv"));
  EXPECT_EQ(rows.size(), 1002u);
  EXPECT_NE(lines(slurp(dir_ / "trajectory.csv"))[0].find("lam"), std::string::npos);
}

TEST_F(Cli, DegenerateCarriageIsRegularityError) {
  const auto cfg = write_config(
      {{"version", 1}, {"system", "carriage"}, {"params", {{"I", -0.375}}}, {"horizon", 1.0}});
  const Result r = exec("simulate --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("regularity"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("carriage"), std::string::npos) << r.err;
}

TEST_F(Cli, HeisenbergCheckPassesAndReportIsOrdered) {
  const auto cfg = write_config({{"version", 1},
                                 {"system", "heisenberg"},
                                 {"horizon", 3.0},
                                 {"criteria", {"NH_IS_VAK_INTEGRAL", "NH_IS_VAK_MULTIPLIER"}}});
  const Result r = exec("check --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  const auto rep = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  ASSERT_TRUE(rep.is_array());
  ASSERT_EQ(rep.size(), 2u);
  std::vector<std::string> keys;
  for (const auto& [k, v] : rep[0].items()) keys.push_back(k);
  const std::vector<std::string> expected{"criterion", "residual", "tolerance", "verdict",
                                          "samples",   "system",   "params",    "seed",
                                          "family_size"};
  EXPECT_EQ(keys, expected);
  EXPECT_EQ(rep[0]["criterion"], "NH_IS_VAK_INTEGRAL");
  EXPECT_EQ(rep[0]["family_size"], 7);
  EXPECT_TRUE(rep[1]["verdict"].get<bool>());
  EXPECT_FALSE(rep[1].contains("family_size"));
}

TEST_F(Cli, CarriageOffRootCheckFails) {
  nlohmann::ordered_json j = carriage_config(0.5, 1.0);
  j["params"] = {{"XY", 0.5}};
  j["criteria"] = {"NH_IS_VAK_INTEGRAL"};
  const Result r = exec("check --config " + write_config(j).string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 1) << r.err;
  const auto rep = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  EXPECT_FALSE(rep[0]["verdict"].get<bool>());
}

TEST_F(Cli, ToleranceOverrideChangesVerdict) {
  nlohmann::ordered_json j = carriage_config(0.3, 1.0);
  j["criteria"] = {"NH_IS_VAK_INTEGRAL"};
  const auto cfg = write_config(j);
  EXPECT_EQ(exec("check --config " + cfg.string() + " --out " + dir_.string()).code, 1);
  const Result r = exec("check --config " + cfg.string() + " --out " + dir_.string() +
                    " --tol NH_IS_VAK_INTEGRAL=10");
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(rep[0]["tolerance"].get<double>(), 10.0);
  EXPECT_EQ(exec("check --config " + cfg.string() + " --tol BOGUS=1").code, 2);
  EXPECT_EQ(exec("check --config " + cfg.string() + " --tol NH_IS_VAK_INTEGRAL=x").code, 2);
}

TEST_F(Cli, CriteriaOverrideFromCommandLine) {
  const auto cfg = write_config({{"version", 1}, {"system", "holonomic-demo"}, {"horizon", 2.0}});
  const Result r = exec("check --config " + cfg.string() + " --out " + dir_.string() +
                    " --criteria NH_IS_UNCONSTRAINED,VAK_IS_NH");
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  ASSERT_EQ(rep.size(), 2u);
  EXPECT_EQ(rep[1]["criterion"], "VAK_IS_NH");
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  const std::vector<nlohmann::ordered_json> bad{
      {{"version", 1}, {"system", "heisenberg"}, {"criteria", nlohmann::ordered_json::array()}},
      {{"version", 1}, {"system", "heisenberg"}, {"criteria", {"NH_IS_VAK_INTEGRAL"}}, {"colour", 1}},
      {{"version", 1}, {"system", "heisenberg"}, {"criteria", {"NOT_A_CRITERION"}}},
      {{"version", 2}, {"system", "heisenberg"}, {"criteria", {"NH_IS_VAK_INTEGRAL"}}},
      {{"version", 1}, {"system", "bicycle"}, {"criteria", {"NH_IS_VAK_INTEGRAL"}}},
      {{"version", 1}, {"system", "unicycle"}, {"params", {{"mass", 1.0}}}},
      {{"version", 1}, {"system", "unicycle"}, {"initial", {{"v0_d", {1.0}}}}},
      {{"version", 1}, {"system", "unicycle"}, {"threads", 0}},
      {{"version", 1}, {"system", "unicycle"}, {"family_size", 1}, {"criteria", {"NH_IS_VAK_INTEGRAL"}}},
  };
  for (const auto& j : bad) {
    const Result r = exec("check --config " + write_config(j).string() + " --out " + dir_.string());
    EXPECT_EQ(r.code, 2) << j.dump();
    EXPECT_NE(r.err.find("config error"), std::string::npos) << r.err;
  }
  std::ofstream(dir_ / "broken.json") << "{ not json";
  EXPECT_EQ(exec("check --config " + (dir_ / "broken.json").string()).code, 2);
  EXPECT_EQ(exec("check --config " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(exec("check").code, 2);
  EXPECT_EQ(exec("frobnicate").code, 2);
  EXPECT_EQ(exec("--help").code, 0);
}

TEST_F(Cli, SweepFindsTheRootOnce) {
  const double root = nhvak::carriage_xy_root({});
  std::string values;
  for (int k = 0; k < 20; ++k) {
    const double l = k == 10 ? root : root * (0.3 + 0.07 * k);
    values += (k ? "," : "") + nhvak::format_double(l);
  }
  const auto cfg = write_config(carriage_config(0.5, 1.0));
  const Result r = exec("sweep --config " + cfg.string() + " --out " + dir_.string() +
                    " --param l --values " + values);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_EQ(rows[0], "value,XY,residual,verdict");
  int trues = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    ASSERT_EQ(f.size(), 4u);
    if (f[3] == "true") {
      ++trues;
      EXPECT_EQ(i, 11u);
      EXPECT_NEAR(std::stod(f[1]), 1.0, 1e-12);
    }
  }
  EXPECT_EQ(trues, 1);
}

TEST_F(Cli, SweepEdgeCases) {
  const auto cfg = write_config({{"version", 1}, {"system", "unicycle"}, {"horizon", 2.0}});
  Result r = exec("sweep --config " + cfg.string() + " --out " + dir_.string() +
              " --param m --values \"\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir_ / "sweep.csv")).size(), 1u);

  r = exec("sweep --config " + cfg.string() + " --out " + dir_.string() +
          " --param m --values 0.5,1,2,4");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    EXPECT_EQ(f[1], "nan");
    EXPECT_EQ(f[3], "true") << rows[i];
  }
  EXPECT_EQ(exec("sweep --config " + cfg.string() + " --param nope --values 1").code, 2);
  EXPECT_EQ(exec("sweep --config " + cfg.string() + " --param m --values 1 "
                "--criteria NH_IS_VAK_INTEGRAL,VAK_IS_NH").code,
            2);
  EXPECT_EQ(exec("sweep --config " + cfg.string() + " --param m").code, 2);
}

TEST_F(Cli, OutputsAreDeterministicAcrossRunsAndThreads) {
  nlohmann::ordered_json j = carriage_config(0.4, 1.2);
  j["criteria"] = {"NH_IS_VAK_INTEGRAL", "NH_IS_UNCONSTRAINED"};
  j["horizon"] = 2.0;
  std::vector<std::string> reports, sweeps;
  for (int threads : {1, 1, 3}) {
    j["threads"] = threads;
    const auto cfg = write_config(j);
    const fs::path out = dir_ / ("t" + std::to_string(reports.size()));
    exec("check --config " + cfg.string() + " --out " + out.string());
    const Result r = exec("sweep --config " + cfg.string() + " --out " + out.string() +
                      " --param l --values 0.2,0.4,0.6 --criteria NH_IS_VAK_INTEGRAL");
    ASSERT_EQ(r.code, 0) << r.err;
    reports.push_back(slurp(out / "report.json"));
    sweeps.push_back(slurp(out / "sweep.csv"));
  }
  ASSERT_FALSE(reports[0].empty());
  EXPECT_EQ(reports[0], reports[1]);
  EXPECT_EQ(reports[0], reports[2]);
  EXPECT_EQ(sweeps[0], sweeps[1]);
  EXPECT_EQ(sweeps[0], sweeps[2]);
}

TEST_F(Cli, SeedChangesFamilyButNotVerdict) {
  nlohmann::ordered_json j = carriage_config(0.3, 1.0);
  j["criteria"] = {"NH_IS_VAK_INTEGRAL"};
  const auto cfg = write_config(j);
  exec("check --config " + cfg.string() + " --out " + (dir_ / "a").string());
  exec("check --config " + cfg.string() + " --out " + (dir_ / "b").string() + " --seed 7");
  const auto a = nlohmann::ordered_json::parse(slurp(dir_ / "a" / "report.json"));
  const auto b = nlohmann::ordered_json::parse(slurp(dir_ / "b" / "report.json"));
  EXPECT_EQ(b[0]["seed"], 7);
  EXPECT_NE(a[0]["residual"], b[0]["residual"]);
  EXPECT_EQ(a[0]["verdict"], b[0]["verdict"]);
}

TEST_F(Cli, ReportSubcommand) {
  const auto cfg = write_config({{"version", 1},
                                 {"system", "heisenberg"},
                                 {"horizon", 1.0},
                                 {"criteria", {"NH_IS_VAK_MULTIPLIER"}}});
  ASSERT_EQ(exec("check --config " + cfg.string() + " --out " + dir_.string()).code, 0);
  const Result r = exec("report " + (dir_ / "report.json").string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("NH_IS_VAK_MULTIPLIER"), std::string::npos);
  EXPECT_NE(r.out.find("heisenberg"), std::string::npos);
  EXPECT_EQ(exec("report " + (dir_ / "absent.json").string()).code, 2);
}

TEST_F(Cli, VakIsNhFromMultiplierSeed) {
  nlohmann::ordered_json j = {{"version", 1},
                              {"system", "heisenberg"},
                              {"horizon", 2.0},
                              {"initial", {{"v0_d", {1.0, 0.0}}, {"lam0", {0.25}}}},
                              {"criteria", {"VAK_IS_NH"}}};
  Result r = exec("check --config " + write_config(j).string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 1) << r.err;
  j["initial"]["lam0"] = {0.0};
  r = exec("check --config " + write_config(j).string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 0) << r.err;
}
