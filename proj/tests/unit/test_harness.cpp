#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "spslab/harness.hpp"
#include "spslab/problems.hpp"

using namespace spslab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spslab_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::uint64_t> seeds_upto(std::uint64_t n) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 0; k < n; ++k) s.push_back(k);
  return s;
}

}  // namespace

TEST_CASE("config: empty text gives defaults") {
  const ExperimentConfig cfg = parse_config_text("");
  CHECK(cfg == ExperimentConfig{});
  CHECK(emit_config(cfg).find("problem.class = quadratic\n") != std::string::npos);
}

TEST_CASE("config: parse, emit, parse round trip") {
  const std::string text =
      "# comment line\n"
      "problem.class = absolute\n"
      "problem.n = 64\n"
      "problem.d = 7\n"
      "problem.seed = 5\n"
      "problem.interpolated = false\n"
      "problem.noise = 0.25\n"
      "problem.unit_rows = true\n"
      "optimizer.method = iam_adam\n"
      "optimizer.optloss = custom   # trailing comment\n"
      "optimizer.optloss_value = 0.125\n"
      "optimizer.lambda = linear\n"
      "optimizer.beta2 = 0.99\n"
      "optimizer.eps_pre = 1e-6\n"
      "run.T = 321\n"
      "run.batch_size = 3\n"
      "run.seeds = 2..6\n"
      "run.checkpoints = 10,100\n"
      "output.dir = somewhere\n"
      "output.emit_trajectory = false\n";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.problem.cls == "absolute");
  CHECK(cfg.problem.n == 64);
  CHECK(cfg.optimizer.method == Method::IamAdam);
  CHECK(cfg.optimizer.optloss == OptLossMode::custom(0.125));
  CHECK(cfg.optimizer.lambda == LambdaSchedule::linear());
  CHECK(cfg.run.seeds == std::vector<std::uint64_t>{2, 3, 4, 5, 6});
  CHECK(cfg.run.checkpoints == std::vector<std::int64_t>{10, 100});
  const std::string emitted = emit_config(cfg);
  CHECK(parse_config_text(emitted) == cfg);
  CHECK(emit_config(parse_config_text(emitted)) == emitted);
  CHECK(config_digest(cfg) == config_digest(parse_config_text(emitted)));
  ExperimentConfig other = cfg;
  other.optimizer.lr = 0.5;
  CHECK(config_digest(other) != config_digest(cfg));
}

TEST_CASE("config: round trip keeps awkward doubles exact") {
  ExperimentConfig cfg;
  cfg.optimizer.lr = 0.1 + 0.2;
  cfg.problem.nu = 1.0 / 3.0;
  cfg.optimizer.lambda = LambdaSchedule::constant(9.0);
  cfg.run.seeds = {7, 1, 3};
  CHECK(parse_config_text(emit_config(cfg)) == cfg);
}

TEST_CASE("config: errors name the offending key and line") {
  CHECK_THROWS_WITH_AS(parse_config_text("problem.n = 5\noptimizer.learning_rat = 0.1\n", "x.cfg"),
                       doctest::Contains("learning_rat"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("problem.n = 5\noptimizer.learning_rat = 0.1\n", "x.cfg"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.n = 5\nproblem.n = 6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.n five\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.n = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("run.batch_size = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("optimizer.method = adamw\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.class = mnist\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("optimizer.optloss_value = 2\n"), ConfigError);
}

TEST_CASE("seed lists and step resolution") {
  CHECK(parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seed_list("4") == std::vector<std::uint64_t>{4});
  CHECK(parse_seed_list("1, 4,9") == std::vector<std::uint64_t>{1, 4, 9});
  CHECK_THROWS_AS(parse_seed_list("5..2"), ConfigError);
  RunSpec run;
  run.T = 17;
  CHECK(resolved_steps(run, 100) == 17);
  run.epochs = 7;
  run.batch_size = 16;
  CHECK(resolved_steps(run, 1000) == 438);
}

TEST_CASE("run_single: T = 0 yields only the initial row") {
  const QuadraticFiniteSum p = gen_quadratic(10, 3, true, 0.1, 0);
  const RunRecord r = run_single(p, OptimizerSpec{}, 0, 1, 0);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].t == 0);
  CHECK(r.rows[0].loss_full == p.full_loss(Vec::Zero(3)));
  CHECK(r.rows[0].cesaro_loss == r.rows[0].loss_full);
  CHECK(std::isnan(r.rows[0].loss_batch));
  CHECK(std::isnan(r.rows[0].stepsize));
  CHECK_FALSE(r.failed);
}

TEST_CASE("run_single: rows are contiguous and cesaro follows the running mean") {
  const QuadraticFiniteSum p = gen_quadratic(20, 3, false, 0.1, 1);
  OptimizerSpec spec;
  spec.method = Method::Sgd;
  spec.lr = 0.05;
  const RunRecord r = run_single(p, spec, 30, 2, 4);
  REQUIRE(r.rows.size() == 31);
  // Replay the sampler to rebuild the iterates independently.
  RandomSource sampler = make_rng(4).split("sampler");
  Vec x = Vec::Zero(3);
  RunningAverage avg;
  for (std::int64_t t = 0; t <= 30; ++t) {
    CHECK(r.rows[static_cast<std::size_t>(t)].t == t);
    CHECK(r.rows[static_cast<std::size_t>(t)].loss_full == doctest::Approx(p.full_loss(x)).epsilon(1e-14));
    if (t > 0)
      CHECK(r.rows[static_cast<std::size_t>(t)].cesaro_loss == doctest::Approx(p.full_loss(avg.mean())).epsilon(1e-14));
    CHECK(r.rows[static_cast<std::size_t>(t)].dist_to_opt ==
          doctest::Approx((x - p.solution()->x_star).norm()).epsilon(1e-14));
    if (t == 30) break;
    avg.push(x);
    const BatchSample b = sample_batch(sampler, p.size(), 2);
    x = x - 0.05 * p.eval(b, x).grad;
  }
}

TEST_CASE("run_single: divergence marks the run failed and keeps earlier rows") {
  const QuadraticFiniteSum p = gen_quadratic(10, 3, false, 0.1, 1);
  OptimizerSpec spec;
  spec.method = Method::Sgd;
  spec.lr = 1e6;
  const RunRecord r = run_single(p, spec, 500, 1, 0);
  CHECK(r.failed);
  CHECK_FALSE(r.failure.empty());
  CHECK(r.rows.size() < 501);
  CHECK(r.rows.size() >= 1);
}

TEST_CASE("run_single: poisson runs carry dist_to_opt, csv problems without a solve do not") {
  const PoissonRegression p = gen_poisson(50, 3, 0.5, 0);
  const RunRecord r = run_single(p, OptimizerSpec{}, 5, 4, 0);
  CHECK(std::isfinite(r.rows.back().dist_to_opt));
  PoissonRegression unsolved({Vec::Ones(2), Vec::Zero(2)}, {1.0, 2.0});
  OptimizerSpec sgd;
  sgd.method = Method::Sgd;
  const RunRecord u = run_single(unsolved, sgd, 3, 1, 0);
  CHECK(std::isnan(u.rows.back().dist_to_opt));
}

TEST_CASE("determinism: repeated runs are byte identical") {
  const QuadraticFiniteSum p = gen_quadratic(40, 5, false, 0.1, 3);
  OptimizerSpec spec;
  spec.lambda = LambdaSchedule::linear();
  std::ostringstream a, b;
  write_trajectory_csv(a, run_single(p, spec, 200, 2, 9));
  write_trajectory_csv(b, run_single(p, spec, 200, 2, 9));
  CHECK(a.str() == b.str());
  std::ostringstream c;
  write_trajectory_csv(c, run_single(p, spec, 200, 2, 10));
  CHECK(c.str() != a.str());
}

TEST_CASE("parallel and serial sweeps write identical files") {
  ExperimentConfig cfg;
  cfg.problem.n = 30;
  cfg.problem.d = 4;
  cfg.problem.interpolated = false;
  cfg.problem.nu = 0.1;
  cfg.run.T = 150;
  cfg.run.batch_size = 2;
  cfg.run.seeds = seeds_upto(8);
  const fs::path serial = scratch("serial"), parallel = scratch("parallel");
  const auto rs = run_experiment(cfg, serial, 1);
  const auto rp = run_experiment(cfg, parallel, 4);
  REQUIRE(rs.size() == 8);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(rs[i].seed == i);
    CHECK(rs[i] == rp[i]);
  }
  for (const auto& e : fs::directory_iterator(serial))
    CHECK(slurp(e.path()) == slurp(parallel / e.path().filename()));
  CHECK(fs::exists(serial / "summary.csv"));
  CHECK(fs::exists(serial / "seed_7.csv"));
  const std::string config_txt = slurp(serial / "config.txt");
  CHECK(config_txt.rfind("# digest " + config_digest(cfg) + "\n", 0) == 0);
  CHECK(parse_config_text(config_txt) == cfg);
  CHECK(slurp(serial / "seed_0.csv").rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
  const std::string summary = slurp(serial / "summary.csv");
  CHECK(summary.rfind("seed,steps,final_loss_full,final_cesaro_loss,final_dist_to_opt,failed\n", 0) == 0);
  fs::remove_all(serial);
  fs::remove_all(parallel);
}

TEST_CASE("emit_trajectory = false skips the per-seed files") {
  ExperimentConfig cfg;
  cfg.run.T = 5;
  cfg.run.seeds = {0, 1};
  cfg.output.emit_trajectory = false;
  const fs::path dir = scratch("notraj");
  run_experiment(cfg, dir);
  CHECK_FALSE(fs::exists(dir / "seed_0.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  fs::remove_all(dir);
}

TEST_CASE("iam with exact opt-loss reaches the optimum on an interpolated quadratic") {
  const QuadraticFiniteSum p = gen_quadratic(100, 10, true, 0.1, 0);
  OptimizerSpec spec;
  spec.lambda = LambdaSchedule::constant(9.0);
  const auto runs = run_seeds(p, spec, 3000, 4, seeds_upto(5), 4);
  for (const auto& r : runs) CHECK(std::abs(r.rows.back().loss_full - p.solution()->f_star) <= 1e-6);
}

TEST_CASE("iam with zero opt-loss stalls above the optimum without interpolation") {
  const QuadraticFiniteSum p = gen_quadratic(100, 10, false, 0.1, 0);
  OptimizerSpec spec;
  spec.lambda = LambdaSchedule::constant(9.0);
  spec.optloss = OptLossMode::zero();
  const auto runs = run_seeds(p, spec, 3000, 4, seeds_upto(5), 4);
  CHECK(*p.constants(Vec::Zero(10)).delta_star > 0.0);
  for (const auto& r : runs) CHECK(r.rows.back().loss_full - p.solution()->f_star > 1e-3);
}

TEST_CASE("grid: singleton, best pick and diverged entries") {
  ExperimentConfig base;
  base.problem.n = 20;
  base.problem.d = 3;
  base.optimizer.method = Method::Sgd;
  base.run.T = 100;
  base.run.seeds = {0, 1};
  ExperimentConfig small = base, good = base, wild = base;
  small.optimizer.lr = 1e-4;
  good.optimizer.lr = 0.05;
  wild.optimizer.lr = 1e6;
  const auto one = run_grid({{"only", small}});
  REQUIRE(one.size() == 1);
  CHECK(one[0].best);
  const auto g = run_grid({{"small", small}, {"good", good}, {"wild", wild}}, 2);
  REQUIRE(g.size() == 3);
  CHECK(g[2].failed);
  CHECK_FALSE(g[2].best);
  CHECK(g[1].best);
  CHECK(g[1].final_loss < g[0].final_loss);
}

TEST_CASE("build_problem covers every class") {
  for (const char* cls : {"quadratic", "absolute", "poisson", "distillation"}) {
    ProblemSpec s;
    s.cls = cls;
    s.n = 40;
    s.d = 4;
    CAPTURE(cls);
    auto p = build_problem(s);
    CHECK(p->size() == 40);
    CHECK(p->dim() == 4);
  }
  ProblemSpec bad;
  bad.cls = "nope";
  CHECK_THROWS_AS(build_problem(bad), ConfigError);
}

TEST_CASE("verify suite names") {
  CHECK(expand_suite("rates") == std::vector<std::string>{"rates_nonsmooth", "rates_smooth", "rates_strong"});
  CHECK(expand_suite("all") == suite_names());
  CHECK(expand_suite("lemmas") == std::vector<std::string>{"lemmas"});
  CHECK_THROWS(expand_suite("bogus"));
}

TEST_CASE("verify equivalence suite passes and writes its reports") {
  const SuiteResult r = run_suite("equivalence");
  CHECK(r.passed());
  const fs::path dir = scratch("verify");
  write_suite(r, dir);
  const std::string txt = slurp(dir / "verify_equivalence.txt");
  CHECK(txt.find("result PASS") != std::string::npos);
  CHECK(slurp(dir / "verify_equivalence.csv").rfind("name,passed,worst_ratio\n", 0) == 0);
  fs::remove_all(dir);
}
