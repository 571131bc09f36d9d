#pragma once

// Config parsing, the experiment runner and the verification suites.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "spslab/analysis.hpp"
#include "spslab/core.hpp"
#include "spslab/optimizers.hpp"

namespace spslab {

// ---------------------------------------------------------------------------
// Configuration

struct ProblemSpec {
  std::string cls = "quadratic";  // quadratic | absolute | poisson | distillation | csv
  Index n = 100;
  Index d = 10;
  std::uint64_t seed = 0;
  bool interpolated = true;
  double nu = 0.0;
  double noise = 0.1;
  Index d_student = 0;  // 0 means d
  double ridge = 1e-8;
  bool unit_rows = false;
  double weight_scale = 0.5;
  std::string path;

  bool operator==(const ProblemSpec&) const = default;
};

struct RunSpec {
  std::int64_t T = 1000;
  double epochs = 0.0;  // when > 0, T = ceil(epochs * n / batch_size)
  Index batch_size = 1;
  std::vector<std::uint64_t> seeds{0};
  std::vector<std::int64_t> checkpoints;

  bool operator==(const RunSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  bool emit_trajectory = true;

  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  RunSpec run;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Flat `section.key = value` lines; `#` starts a comment. Unknown keys and
/// malformed lines raise ConfigError with the line number.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path);
/// Every field, one per line, in a fixed order.
std::string emit_config(const ExperimentConfig& cfg);
std::string config_digest(const ExperimentConfig& cfg);

/// "0..19", "3", or "1,4,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Step count after resolving run.epochs against the problem size.
std::int64_t resolved_steps(const RunSpec& run, Index n);

// ---------------------------------------------------------------------------
// Runner

std::unique_ptr<StochasticOracle> build_problem(const ProblemSpec& spec);

/// One seed. The sampler stream is make_rng(seed).split("sampler"). A
/// NumericalError marks the record failed and keeps the rows produced so far.
RunRecord run_single(const StochasticOracle& problem, const OptimizerSpec& optimizer, std::int64_t steps,
                     Index batch_size, std::uint64_t seed, const std::string& digest = {});

/// All seeds of a config, sorted by seed. threads <= 1 runs serially.
std::vector<RunRecord> run_seeds(const StochasticOracle& problem, const OptimizerSpec& optimizer, std::int64_t steps,
                                 Index batch_size, const std::vector<std::uint64_t>& seeds, int threads,
                                 const std::string& digest = {});

/// Builds the problem, runs every seed and writes config.txt, seed_<k>.csv
/// (when emit_trajectory) and summary.csv into out_dir.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                      int threads = 1);

struct GridEntry {
  std::string label;
  ExperimentConfig config;
  double final_loss = 0.0;  // seed mean of the last-iterate full loss
  bool failed = false;
  bool best = false;
};

/// Runs each config; diverged entries are marked and never chosen as best.
std::vector<GridEntry> run_grid(const std::vector<std::pair<std::string, ExperimentConfig>>& configs, int threads = 1);

/// Seed mean of a column at row t (last row when t < 0), skipping failed runs.
double mean_at(const std::vector<RunRecord>& runs, std::int64_t t, double TrajectoryRow::*column);

// ---------------------------------------------------------------------------
// Verification

struct VerifyOptions {
  std::vector<std::uint64_t> seeds;  // empty means 0..19
  int threads = 1;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckReport> reports;
  bool passed() const;
};

/// Concrete suites in the order `all` runs them.
const std::vector<std::string>& suite_names();
/// Expands `all` and `rates` into concrete suite names; rejects unknown names.
std::vector<std::string> expand_suite(const std::string& name);

SuiteResult run_suite(const std::string& suite, const VerifyOptions& options = {});
/// verify_<suite>.txt and verify_<suite>.csv
void write_suite(const SuiteResult& result, const std::filesystem::path& dir);

}  // namespace spslab
