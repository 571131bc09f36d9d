#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "spslab/harness.hpp"
#include "spslab/problems.hpp"

namespace spslab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool needs_constants(const OptimizerSpec& spec) {
  return (spec.method == Method::Sgd || spec.method == Method::SgdM) &&
         (spec.lr_rule == LrRule::Theory || spec.lr_rule == LrRule::FiniteHorizon);
}

}  // namespace

std::unique_ptr<StochasticOracle> build_problem(const ProblemSpec& s) {
  if (s.cls == "quadratic")
    return std::make_unique<QuadraticFiniteSum>(gen_quadratic(s.n, s.d, s.interpolated, s.nu, s.seed));
  if (s.cls == "absolute")
    return std::make_unique<AbsoluteLossRegression>(
        gen_absolute(s.n, s.d, s.interpolated, s.noise, s.unit_rows, s.seed));
  if (s.cls == "poisson") return std::make_unique<PoissonRegression>(gen_poisson(s.n, s.d, s.weight_scale, s.seed));
  if (s.cls == "distillation")
    return std::make_unique<DistillationTask>(
        gen_distillation(s.n, s.d, s.d_student > 0 ? s.d_student : s.d, s.noise, s.seed, s.ridge));
  if (s.cls == "csv") return std::make_unique<PoissonRegression>(load_poisson_csv(s.path));
  throw ConfigError("unknown problem class '" + s.cls + "'");
}

RunRecord run_single(const StochasticOracle& problem, const OptimizerSpec& spec, std::int64_t steps,
                     Index batch_size, std::uint64_t seed, const std::string& digest) {
  if (steps < 0) throw ContractError("run_single: steps must be >= 0");
  RunRecord rec;
  rec.seed = seed;
  rec.config_digest = digest;
  RandomSource sampler = make_rng(seed).split("sampler");
  const Vec x0 = problem.initial_point();
  const ProblemConstants constants = needs_constants(spec) ? problem.constants(x0) : ProblemConstants{};
  auto opt = make_optimizer(spec, x0, constants, steps);
  const auto& sol = problem.solution();
  RunningAverage avg;
  rec.rows.reserve(static_cast<std::size_t>(steps + 1));
  rec.diagnostics.reserve(static_cast<std::size_t>(steps + 1));

  for (std::int64_t t = 0; t <= steps; ++t) {
    TrajectoryRow row;
    RowDiagnostics diag{kNaN, kNaN, kNaN};
    row.t = t;
    {
      const Vec& x = opt->x();
      row.loss_full = problem.full_loss(x);
      row.cesaro_loss = t == 0 ? row.loss_full : problem.full_loss(avg.mean());
      if (sol) {
        row.dist_to_opt = (x - sol->x_star).norm();
        diag.gap = problem.suboptimality(x);
        diag.cesaro_gap = t == 0 ? diag.gap : problem.suboptimality(avg.mean());
        const auto anchor = opt->anchor();
        diag.anchor_dist = anchor ? (*anchor - sol->x_star).norm() : row.dist_to_opt;
      } else {
        row.dist_to_opt = kNaN;
      }
      if (!std::isfinite(row.loss_full)) {
        row.loss_batch = kNaN;
        row.stepsize = kNaN;
        rec.rows.push_back(row);
        rec.diagnostics.push_back(diag);
        rec.failed = true;
        rec.failure = "non-finite full loss at t = " + std::to_string(t);
        break;
      }
      if (t == steps) {
        row.loss_batch = kNaN;
        row.stepsize = kNaN;
        rec.rows.push_back(row);
        rec.diagnostics.push_back(diag);
        break;
      }
      avg.push(x);
    }
    const BatchSample batch = sample_batch(sampler, problem.size(), batch_size);
    try {
      const StepInfo info = opt->step(batch, problem);
      row.loss_batch = info.batch_loss;
      row.stepsize = info.stepsize;
    } catch (const NumericalError& e) {
      row.loss_batch = kNaN;
      row.stepsize = kNaN;
      rec.rows.push_back(row);
      rec.diagnostics.push_back(diag);
      rec.failed = true;
      rec.failure = std::string(e.what()) + " (step " + std::to_string(t) + ")";
      break;
    }
    rec.rows.push_back(row);
    rec.diagnostics.push_back(diag);
  }
  return rec;
}

std::vector<RunRecord> run_seeds(const StochasticOracle& problem, const OptimizerSpec& spec, std::int64_t steps,
                                 Index batch_size, const std::vector<std::uint64_t>& seeds, int threads,
                                 const std::string& digest) {
  std::vector<RunRecord> out(seeds.size());
  const std::size_t workers = std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = run_single(problem, spec, steps, batch_size, seeds[i], digest);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            out[i] = run_single(problem, spec, steps, batch_size, seeds[i], digest);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  std::stable_sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  return out;
}

double mean_at(const std::vector<RunRecord>& runs, std::int64_t t, double TrajectoryRow::*column) {
  double s = 0.0;
  int k = 0;
  for (const auto& r : runs) {
    if (r.failed || r.rows.empty()) continue;
    const std::size_t idx = t < 0 ? r.rows.size() - 1 : static_cast<std::size_t>(t);
    if (idx >= r.rows.size()) continue;
    s += r.rows[idx].*column;
    ++k;
  }
  return k == 0 ? kNaN : s / k;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads) {
  auto problem = build_problem(cfg.problem);
  const std::string digest = config_digest(cfg);
  const std::int64_t steps = resolved_steps(cfg.run, problem->size());
  auto runs = run_seeds(*problem, cfg.optimizer, steps, cfg.run.batch_size, cfg.run.seeds, threads, digest);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "config.txt", std::ios::binary);
    f << "# digest " << digest << '\n' << emit_config(cfg);
  }
  if (cfg.output.emit_trajectory) {
    for (const auto& r : runs) {
      std::ofstream f(out_dir / ("seed_" + std::to_string(r.seed) + ".csv"), std::ios::binary);
      write_trajectory_csv(f, r);
    }
  }
  std::ofstream f(out_dir / "summary.csv", std::ios::binary);
  f << "seed,steps,final_loss_full,final_cesaro_loss,final_dist_to_opt,failed\n";
  for (const auto& r : runs) {
    const TrajectoryRow last = r.rows.empty() ? TrajectoryRow{} : r.rows.back();
    f << r.seed << ',' << last.t << ',' << format_real(last.loss_full) << ',' << format_real(last.cesaro_loss) << ','
      << format_real(last.dist_to_opt) << ',' << (r.failed ? 1 : 0) << '\n';
  }
  return runs;
}

std::vector<GridEntry> run_grid(const std::vector<std::pair<std::string, ExperimentConfig>>& configs, int threads) {
  std::vector<GridEntry> out;
  out.reserve(configs.size());
  for (const auto& [label, cfg] : configs) {
    auto problem = build_problem(cfg.problem);
    const std::int64_t steps = resolved_steps(cfg.run, problem->size());
    auto runs = run_seeds(*problem, cfg.optimizer, steps, cfg.run.batch_size, cfg.run.seeds, threads,
                          config_digest(cfg));
    GridEntry e;
    e.label = label;
    e.config = cfg;
    e.failed = std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed; });
    e.final_loss = e.failed ? kNaN : mean_at(runs, -1, &TrajectoryRow::loss_full);
    out.push_back(std::move(e));
  }
  GridEntry* best = nullptr;
  for (auto& e : out)
    if (!e.failed && std::isfinite(e.final_loss) && (!best || e.final_loss < best->final_loss)) best = &e;
  if (best) best->best = true;
  return out;
}

}  // namespace spslab
