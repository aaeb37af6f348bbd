#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsa/common.hpp"
#include "lsa/io.hpp"

namespace lsa::cli {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kAssumption = 3,
  kNumerical = 4,
  kBudget = 5,
};

int exit_code(ErrorKind kind);

struct ExperimentConfig {
  std::filesystem::path instance_path;
  std::string experiment;                 // validate, mse-sweep, ...
  std::vector<long> n_grid;
  std::vector<double> p_grid{2.0};
  bool alpha_optimized = true;
  std::vector<double> alpha;              // used when !alpha_optimized
  long R = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "results";
  int threads = 1;
  bool budget_override = false;
  double budget = 5e10;
  // Optional knobs.
  std::string theta0 = "zero";            // "zero", "theta_star" or explicit
  std::vector<double> theta0_values;
  std::vector<std::string> quantities{"pr_err"};
  double q = 0.0;                         // 0 = each bound's default
  std::optional<double> delta;
  double c1_markov = 1.0;
  int bootstrap_replicates = 400;
  long path_length = 1000000;
  long batch_count = 100;
  bool literal_covariance = false;
  std::string seed_source = "config";
  Json raw;                               // echoed into meta.json
};

// Unknown keys and malformed values throw ErrorKind::Parse. Relative
// instance paths resolve against base_dir.
ExperimentConfig parse_config(const Json& j,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  std::string experiment;
  std::string quantity;
  long n = 0;
  double p = 0.0;
  double alpha = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bound_total = 0.0;
  double bound_leading = 0.0;
  double bound_fluctuation = 0.0;
  double bound_transient = 0.0;
  double bound_bias = 0.0;
  bool eligible = true;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

extern const char* const kCsvHeader;
std::string csv_line(const ResultRow& r);

// Each throws lsa::Error; run_cli maps kinds to exit codes.
void execute_validate(const ExperimentConfig& cfg, std::ostream& out);
void execute_run(const ExperimentConfig& cfg, std::ostream& out);
void execute_report(const std::filesystem::path& dir, std::ostream& out);

int cmd_validate(const ExperimentConfig& cfg, std::ostream& out,
                 std::ostream& err);
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& dir, std::ostream& out,
               std::ostream& err);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lsa::cli
