// spslab command-line driver: run, grid, verify, report.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "spslab/harness.hpp"

namespace fs = std::filesystem;
using namespace spslab;

namespace {

struct Common {
  std::string out;
  std::string seeds;
  int threads = 1;
};

fs::path output_dir(const Common& c, const std::string& fallback) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("SPSLAB_OUT"); env && *env) return env;
  return fallback;
}

void apply_overrides(ExperimentConfig& cfg, const Common& c) {
  if (!c.seeds.empty()) cfg.run.seeds = parse_seed_list(c.seeds);
}

int cmd_run(const std::string& path, const Common& c) {
  ExperimentConfig cfg = parse_config(path);
  apply_overrides(cfg, c);
  const fs::path dir = output_dir(c, cfg.output.dir);
  const auto runs = run_experiment(cfg, dir, c.threads);
  int failed = 0;
  for (const auto& r : runs) {
    const auto& last = r.rows.back();
    std::printf("seed %llu  steps %lld  loss %s  cesaro %s%s\n", static_cast<unsigned long long>(r.seed),
                static_cast<long long>(last.t), format_real(last.loss_full).c_str(),
                format_real(last.cesaro_loss).c_str(), r.failed ? ("  FAILED: " + r.failure).c_str() : "");
    failed += r.failed ? 1 : 0;
  }
  std::printf("mean final loss %s  (%d/%zu runs failed)  -> %s\n",
              format_real(mean_at(runs, -1, &TrajectoryRow::loss_full)).c_str(), failed, runs.size(),
              dir.string().c_str());
  return 0;
}

int cmd_grid(const std::string& config_dir, const Common& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config_dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .cfg files in '" + config_dir + "'");
  std::vector<std::pair<std::string, ExperimentConfig>> configs;
  for (const auto& f : files) {
    ExperimentConfig cfg = parse_config(f);
    apply_overrides(cfg, c);
    configs.emplace_back(f.stem().string(), std::move(cfg));
  }
  const auto entries = run_grid(configs, c.threads);
  const fs::path dir = output_dir(c, "grid_out");
  fs::create_directories(dir);
  std::ofstream csv(dir / "grid_summary.csv", std::ios::binary);
  csv << "label,method,lr,final_loss,failed,best\n";
  for (const auto& e : entries) {
    csv << e.label << ',' << to_string(e.config.optimizer.method) << ',' << format_real(e.config.optimizer.lr) << ','
        << format_real(e.final_loss) << ',' << (e.failed ? 1 : 0) << ',' << (e.best ? 1 : 0) << '\n';
    std::printf("%-24s %-9s final %s%s%s\n", e.label.c_str(), to_string(e.config.optimizer.method).c_str(),
                format_real(e.final_loss).c_str(), e.failed ? "  diverged" : "", e.best ? "  <- best" : "");
  }
  return 0;
}

int cmd_verify(const std::string& suite, const Common& c) {
  VerifyOptions opts;
  if (!c.seeds.empty()) opts.seeds = parse_seed_list(c.seeds);
  opts.threads = c.threads;
  const fs::path dir = output_dir(c, "verify_out");
  bool ok = true;
  for (const auto& name : expand_suite(suite)) {
    const SuiteResult r = run_suite(name, opts);
    write_suite(r, dir);
    write_report_text(std::cout, r.reports);
    std::printf("== %s: %s\n", name.c_str(), r.passed() ? "PASS" : "FAIL");
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

int cmd_report(const std::string& run_dir) {
  std::map<std::uint64_t, RunRecord> runs;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    const std::string stem = e.path().stem().string();
    if (e.path().extension() != ".csv" || stem.rfind("seed_", 0) != 0) continue;
    std::ifstream in(e.path());
    RunRecord r = read_trajectory_csv(in);
    r.seed = std::stoull(stem.substr(5));
    runs.emplace(r.seed, std::move(r));
  }
  if (runs.empty()) throw ConfigError("no seed_<k>.csv trajectories in '" + run_dir + "'");
  std::vector<RunRecord> all;
  std::printf("%-6s %-8s %-24s %-24s %s\n", "seed", "steps", "loss_full", "cesaro_loss", "dist_to_opt");
  for (auto& [seed, r] : runs) {
    const auto& last = r.rows.back();
    std::printf("%-6llu %-8lld %-24s %-24s %s\n", static_cast<unsigned long long>(seed),
                static_cast<long long>(last.t), format_real(last.loss_full).c_str(),
                format_real(last.cesaro_loss).c_str(), format_real(last.dist_to_opt).c_str());
    all.push_back(std::move(r));
  }
  std::printf("mean   %-8s %-24s %-24s %s\n", "", format_real(mean_at(all, -1, &TrajectoryRow::loss_full)).c_str(),
              format_real(mean_at(all, -1, &TrajectoryRow::cesaro_loss)).c_str(),
              format_real(mean_at(all, -1, &TrajectoryRow::dist_to_opt)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Polyak step and IAM laboratory"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory (overrides SPSLAB_OUT and the config)");
    sub->add_option("--seeds", common.seeds, "Seed list, e.g. 0..19 or 1,2,5");
    sub->add_option("--threads", common.threads, "Worker threads for seed sweeps")->check(CLI::PositiveNumber);
  };

  std::string config, config_dir, suite, run_dir;
  auto* run = app.add_subcommand("run", "Run one experiment config over its seeds");
  run->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  add_common(run);
  auto* grid = app.add_subcommand("grid", "Run every .cfg in a directory and pick the best");
  grid->add_option("config-dir", config_dir, "Directory of configs")->required()->check(CLI::ExistingDirectory);
  add_common(grid);
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "lemmas, monotonicity, rates, rates_nonsmooth, rates_smooth, rates_strong, "
                                     "equivalence, misspecification, poisson, distillation or all")
      ->required();
  add_common(verify);
  auto* report = app.add_subcommand("report", "Summarize the trajectories in a run directory");
  report->add_option("run-dir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, common);
    if (*grid) return cmd_grid(config_dir, common);
    if (*verify) return cmd_verify(suite, common);
    if (*report) return cmd_report(run_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spslab: %s\n", e.what());
    return 1;
  }
  return 1;
}
