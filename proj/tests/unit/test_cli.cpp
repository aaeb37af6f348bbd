#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsa/cli.hpp"

namespace fs = std::filesystem;
using lsa::Json;
using namespace lsa::cli;

namespace {

const fs::path kData = LSA_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lsa_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

int run_args(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<char*> argv;
  static std::string prog = "lsa_lab";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, FailClosed) {
  const Json good = {{"instance", "T1.json"}, {"experiment", "validate"}};
  EXPECT_NO_THROW(parse_config(good, kData));
  Json extra = good;
  extra["surprise"] = 1;
  EXPECT_THROW(parse_config(extra, kData), lsa::Error);
  Json odd = {{"instance", "T1.json"}, {"experiment", "mse-sweep"}, {"n_grid", {3}}};
  EXPECT_THROW(parse_config(odd, kData), lsa::Error);
  Json neg = {{"instance", "T1.json"}, {"experiment", "moment-sweep"}, {"n_grid", {4}}, {"alpha", {-1.0}}};
  EXPECT_THROW(parse_config(neg, kData), lsa::Error);
  Json r0 = {{"instance", "T1.json"}, {"experiment", "moment-sweep"}, {"n_grid", {4}}, {"R", 0}};
  EXPECT_THROW(parse_config(r0, kData), lsa::Error);
  Json seed = good;
  seed["master_seed"] = 0;
  EXPECT_EQ(parse_config(seed, kData).master_seed, 0u);
  seed["master_seed"] = -1;
  EXPECT_THROW(parse_config(seed, kData), lsa::Error);
}

TEST(Validate, ExitCodes) {
  const auto dir = scratch("validate");
  std::string text;
  auto cfg = write_config(dir, {{"instance", (kData / "T1.json").string()}, {"experiment", "validate"}});
  EXPECT_EQ(run_args({"validate", "--config", cfg.string()}, &text), 0);
  EXPECT_NE(text.find("theta_star"), std::string::npos);

  cfg = write_config(dir, {{"instance", (kData / "nonhurwitz.json").string()}, {"experiment", "validate"}});
  EXPECT_EQ(run_args({"validate", "--config", cfg.string()}, &text), 3);
  EXPECT_NE(text.find("Hurwitz"), std::string::npos);

  cfg = write_config(dir, {{"instance", (kData / "T2_bad_tmix.json").string()}, {"experiment", "validate"}});
  EXPECT_EQ(run_args({"validate", "--config", cfg.string()}), 3);

  std::ofstream(dir / "broken.json") << "{ not json";
  cfg = write_config(dir, {{"instance", (dir / "broken.json").string()}, {"experiment", "validate"}});
  EXPECT_EQ(run_args({"validate", "--config", cfg.string()}), 2);
}

TEST(Run, BudgetExceededBeforeSimulation) {
  const auto dir = scratch("budget");
  const auto cfg = write_config(dir, {{"instance", (kData / "T1.json").string()},
                                      {"experiment", "mse-sweep"},
                                      {"n_grid", {1024}},
                                      {"R", 1000},
                                      {"budget", 1000.0},
                                      {"output_dir", (dir / "out").string()}});
  EXPECT_EQ(run_args({"run", "--config", cfg.string()}), 5);
  EXPECT_FALSE(fs::exists(dir / "out" / "results.csv"));
}

TEST(Run, BoundsOnlyWritesJsonOnly) {
  const auto dir = scratch("bounds_only");
  const auto cfg = write_config(dir, {{"instance", (kData / "T1.json").string()},
                                      {"experiment", "bounds-only"},
                                      {"n_grid", {1024}},
                                      {"p_grid", {2, 4}},
                                      {"delta", 0.05},
                                      {"output_dir", (dir / "out").string()}});
  EXPECT_EQ(run_args({"run", "--config", cfg.string()}), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "bounds.json"));
  EXPECT_FALSE(fs::exists(dir / "out" / "results.csv"));
  const Json b = Json::parse(slurp(dir / "out" / "bounds.json"));
  ASSERT_GT(b["reports"].size(), 0u);
  for (const auto& r : b["reports"]) {
    EXPECT_TRUE(r.contains("bound_id"));
    EXPECT_TRUE(r["components"].contains("total"));
    EXPECT_TRUE(r.contains("eligibility"));
  }
}

TEST(Run, DeterministicAndSeedPrecedence) {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, {{"instance", (kData / "T1.json").string()},
                                      {"experiment", "moment-sweep"},
                                      {"n_grid", {64, 128}},
                                      {"p_grid", {2, 4}},
                                      {"R", 100},
                                      {"master_seed", 3},
                                      {"quantities", {"pr_err", "J0"}}});
  auto strip = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  ASSERT_EQ(run_args({"run", "--config", cfg.string(), "--out", (dir / "a").string(), "--threads", "1"}), 0);
  ASSERT_EQ(run_args({"run", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "8"}), 0);
  EXPECT_EQ(strip(slurp(dir / "a" / "results.csv")), strip(slurp(dir / "b" / "results.csv")));

  const std::string header = slurp(dir / "a" / "results.csv").substr(0, std::string(kCsvHeader).size());
  EXPECT_EQ(header, kCsvHeader);

  setenv("LSA_LAB_SEED", "77", 1);
  ASSERT_EQ(run_args({"run", "--config", cfg.string(), "--out", (dir / "env").string()}), 0);
  ASSERT_EQ(run_args({"run", "--config", cfg.string(), "--out", (dir / "flag").string(), "--seed", "5"}), 0);
  unsetenv("LSA_LAB_SEED");
  EXPECT_EQ(Json::parse(slurp(dir / "env" / "meta.json"))["master_seed"], 77);
  EXPECT_EQ(Json::parse(slurp(dir / "flag" / "meta.json"))["master_seed"], 5);
  EXPECT_NE(slurp(dir / "env" / "results.csv").find(",77,"), std::string::npos);
}

TEST(Report, SlopesAndMissingInput) {
  const auto dir = scratch("report");
  EXPECT_EQ(run_args({"report", dir.string()}), 2);
  const auto cfg = write_config(dir, {{"instance", (kData / "T1.json").string()},
                                      {"experiment", "stability"},
                                      {"n_grid", {10, 100, 1000}},
                                      {"R", 50},
                                      {"output_dir", (dir / "out").string()}});
  ASSERT_EQ(run_args({"run", "--config", cfg.string()}), 0);
  std::string text;
  EXPECT_EQ(run_args({"report", (dir / "out").string()}, &text), 0);
  EXPECT_NE(text.find("slope="), std::string::npos);
  EXPECT_NE(text.find("violations=0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "series_stability_product_norm_p2.txt"));
}
