#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "locpower/cli.hpp"

using namespace locpower;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(LOCPOWER_TEST_DATA) + "/" + name; }

}  // namespace

TEST(Cli, Roots) {
  const auto r = cli({"roots", "--ratios", "1,5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1,0.318"), std::string::npos);
  EXPECT_NE(r.out.find("5,0.096"), std::string::npos);
}

TEST(Cli, SolveOrthogonal) {
  const auto r = cli({"solve", "--scenario", data("orthogonal.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_NEAR(j["allocation"][0][0].get<double>(), 0.5, 1e-6);
  EXPECT_NEAR(j["allocation"][0][1].get<double>(), 0.5, 1e-6);
  EXPECT_NEAR(j["objective"].get<double>(), 4.0, 1e-7);
}

TEST(Cli, SolveOtherObjectives) {
  auto r = cli({"solve", "--scenario", data("orthogonal.json"), "--objective", "mdpeb"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(r.out)["objective"].get<double>(), 2.0, 1e-7);
  r = cli({"solve", "--scenario", data("orthogonal.json"), "--objective", "energy", "--gamma", "4"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(r.out)["objective"].get<double>(), 1.0, 1e-7);
  r = cli({"solve", "--scenario", data("orthogonal.json"), "--objective", "energy"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, SolveWritesOutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "locpower_cli_alloc.json";
  const auto r = cli({"solve", "--scenario", data("orthogonal.json"), "--output", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  EXPECT_EQ(nlohmann::json::parse(f)["status"], "optimal");
  std::filesystem::remove(path);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"solve", "--scenario", data("malformed.json")}).code, 2);
  EXPECT_EQ(cli({"solve", "--scenario", data("missing.json")}).code, 2);
  EXPECT_EQ(cli({"solve", "--scenario", data("orthogonal.json"), "--objective", "nope"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  const auto r = cli({"solve", "--scenario", data("collinear.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["objective"].is_null());
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ExperimentIsByteStable) {
  const std::vector<std::string> args{"experiment", "--experiment", "fig3", "--trials", "10", "--seed", "1"};
  const auto a = cli(args);
  const auto b = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("experiment,sweep,scheme,trial,objective,status\n", 0), 0u);
  EXPECT_EQ(cli({"experiment", "--experiment", "fig9"}).code, 2);
}

TEST(Cli, OracleAgrees) {
  const auto r = cli({"oracle", "--scenario", data("orthogonal.json"), "--step", "0.01"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("agree"), std::string::npos);
}
