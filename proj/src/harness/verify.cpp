#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spslab/harness.hpp"
#include "spslab/problems.hpp"

namespace spslab {
namespace {

constexpr double kSlack = 0.1;
constexpr double kMonoTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<std::int64_t> kCheckpoints{10, 100, 1000, 10000};

std::vector<std::uint64_t> seeds_of(const VerifyOptions& o) {
  if (!o.seeds.empty()) return o.seeds;
  std::vector<std::uint64_t> s(20);
  for (std::uint64_t k = 0; k < 20; ++k) s[k] = k;
  return s;
}

std::string fmt(double v) { return format_real(v); }

OptimizerSpec sps_star() {
  OptimizerSpec s;
  s.method = Method::Sps;
  s.optloss = OptLossMode::theoretical();
  return s;
}

OptimizerSpec iam(LambdaSchedule lambda, OptLossMode mode = OptLossMode::theoretical()) {
  OptimizerSpec s;
  s.method = Method::Iam;
  s.lambda = lambda;
  s.optloss = mode;
  return s;
}

OptimizerSpec sgd(double lr, double momentum = -1.0) {
  OptimizerSpec s;
  s.method = momentum >= 0.0 ? Method::SgdM : Method::Sgd;
  s.lr = lr;
  s.lr_rule = LrRule::Constant;
  if (momentum >= 0.0) s.momentum = momentum;
  return s;
}

/// Seed mean of a diagnostic (or row) quantity at row t.
template <class F>
double seed_mean(const std::vector<RunRecord>& runs, std::size_t t, F&& get) {
  double s = 0.0;
  for (const auto& r : runs) {
    if (r.failed || t >= r.rows.size()) return std::numeric_limits<double>::quiet_NaN();
    s += get(r, t);
  }
  return s / static_cast<double>(runs.size());
}

double final_gap(const std::vector<RunRecord>& runs) {
  return seed_mean(runs, runs.front().rows.size() - 1,
                   [](const RunRecord& r, std::size_t t) { return r.diagnostics[t].gap; });
}

double final_loss(const std::vector<RunRecord>& runs) {
  return seed_mean(runs, runs.front().rows.size() - 1,
                   [](const RunRecord& r, std::size_t t) { return r.rows[t].loss_full; });
}

// ---------------------------------------------------------------------------

SuiteResult lemmas() {
  SuiteResult res{"lemmas", {}};
  RandomSource root = make_rng(0).split("lemmas");
  constexpr int kTrials = 10000;

  {
    RandomSource rng = root.split("psi_inv");
    double worst = 0.0;
    for (int k = 0; k < kTrials; ++k) {
      double A = 0.0, B = 0.0;
      do {
        A = 10.0 * rng.uniform();
        B = 10.0 * rng.uniform();
      } while (A == 0.0 && B == 0.0);
      const double s = 10.0 * rng.uniform();
      if (s == 0.0) continue;
      worst = std::max(worst, std::abs(psi(psi_inv(s, A, B), A, B) - s) / s);
    }
    res.reports.push_back(ratio_report("psi_inv_roundtrip", worst / 1e-10, 1.0, "max rel err " + fmt(worst)));
  }
  {
    RandomSource rng = root.split("psi_shape");
    double worst = 0.0;
    for (int k = 0; k < kTrials; ++k) {
      const double A = 10.0 * rng.uniform(), B = 0.01 + 10.0 * rng.uniform();
      double r1 = 10.0 * rng.uniform(), r2 = 10.0 * rng.uniform();
      if (r1 > r2) std::swap(r1, r2);
      const double p1 = psi(r1, A, B), p2 = psi(r2, A, B);
      const double pm = psi(0.5 * (r1 + r2), A, B);
      worst = std::max(worst, p1 / (p2 + 1e-12));
      worst = std::max(worst, pm / (0.5 * (p1 + p2) + 1e-12));
    }
    res.reports.push_back(ratio_report("psi_monotone_convex", worst, 1.0));
  }
  {
    RandomSource rng = root.split("titu");
    double worst = 0.0;
    bool all = true;
    for (int k = 0; k < kTrials; ++k) {
      const auto m = 1 + rng.uniform_index(10);
      std::vector<double> a(m), b(m);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = 10.0 * rng.uniform() - 5.0;
        b[i] = 0.01 + 5.0 * rng.uniform();
      }
      all = all && titu_oracle(a, b);
      double lhs = 0.0, sa = 0.0, sb = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        lhs += std::pow(std::max(a[i], 0.0), 2) / b[i];
        sa += a[i];
        sb += b[i];
      }
      worst = std::max(worst, std::pow(std::max(sa, 0.0), 2) / sb / (lhs + 1e-12));
    }
    res.reports.push_back(ratio_report("titu", all ? worst : kInf, 1.0));
  }
  {
    RandomSource rng = root.split("adagrad");
    double worst = 0.0;
    bool all = true;
    for (int k = 0; k < kTrials; ++k) {
      const auto m = 1 + rng.uniform_index(20);
      std::vector<double> c(m);
      for (std::size_t i = 0; i < m; ++i) c[i] = (i > 0 && rng.uniform() < 0.1) ? 0.0 : 5.0 * rng.uniform();
      if (!(c[0] > 0.0)) c[0] = 1.0;
      all = all && adagrad_oracle(c);
      double s = 0.0, rhs = 0.0;
      for (double ck : c) {
        s += ck;
        rhs += ck / std::sqrt(s);
        worst = std::max(worst, std::sqrt(s) / (rhs + 1e-12));
      }
    }
    res.reports.push_back(ratio_report("adagrad", all ? worst : kInf, 1.0));
  }
  {
    RandomSource rng = root.split("perspective");
    RandomSource probe = root.split("perspective_oracle");
    const bool ok = perspective_convexity_probe(probe, kTrials);
    auto phi = [](double x, double y) { return std::pow(std::max(x, 0.0), 2) / y; };
    double worst = 0.0;
    for (int k = 0; k < kTrials; ++k) {
      const double x1 = 6.0 * rng.uniform() - 3.0, x2 = 6.0 * rng.uniform() - 3.0;
      const double y1 = 0.1 + 3.0 * rng.uniform(), y2 = 0.1 + 3.0 * rng.uniform();
      const double mid = phi(0.5 * (x1 + x2), 0.5 * (y1 + y2));
      worst = std::max(worst, mid / (0.5 * (phi(x1, y1) + phi(x2, y2)) + 1e-12));
    }
    res.reports.push_back(ratio_report("perspective_midpoint", ok ? worst : kInf, 1.0));
  }
  {
    ProblemConstants c;
    c.D = 3.0;
    c.G_sq = 2.0;
    c.L = 5.0;
    c.mu = 1.5;
    c.delta_star = 0.05;
    c.sigma_star_sq = 0.3;
    double worst = 0.0;
    bool ok = true;
    for (CertificateKind k : {CertificateKind::NonsmoothAvg, CertificateKind::SmoothAvg,
                              CertificateKind::SmoothAvgSigma, CertificateKind::IamNonsmoothLast,
                              CertificateKind::IamSmoothLast, CertificateKind::StrongConvexDist}) {
      const RateCertificate cert = certificate(k, c);
      std::vector<double> series;
      for (double t = std::max(1.0, std::ceil(cert.threshold)); t <= 1e6; t *= 1.25) series.push_back(cert.bound(t));
      const CheckReport r = check_monotone(series, 0.0);
      ok = ok && r.passed && series.front() > 0.0;
      worst = std::max(worst, r.worst_ratio);
    }
    res.reports.push_back(ratio_report("certificates_nonincreasing", ok ? worst : kInf, 1.0));
  }
  return res;
}

// ---------------------------------------------------------------------------

struct NamedProblem {
  std::string name;
  std::unique_ptr<StochasticOracle> problem;
};

std::vector<NamedProblem> monotonicity_problems() {
  std::vector<NamedProblem> out;
  out.push_back({"quad_interp", std::make_unique<QuadraticFiniteSum>(gen_quadratic(100, 10, true, 0.1, 0))});
  out.push_back({"quad_noninterp", std::make_unique<QuadraticFiniteSum>(gen_quadratic(100, 10, false, 0.1, 0))});
  out.push_back({"absolute_interp",
                 std::make_unique<AbsoluteLossRegression>(gen_absolute(100, 10, true, 0.0, false, 0))});
  return out;
}

SuiteResult monotonicity(const VerifyOptions& o) {
  SuiteResult res{"monotonicity", {}};
  const auto seeds = seeds_of(o);
  constexpr std::int64_t kSteps = 10000;
  struct Variant {
    std::string name;
    OptimizerSpec spec;
    bool anchor;
  };
  const std::vector<Variant> variants{{"sps_x", sps_star(), false},
                                      {"iam_linear_z", iam(LambdaSchedule::linear()), true},
                                      {"iam_9_z", iam(LambdaSchedule::constant(9.0)), true}};
  for (const auto& np : monotonicity_problems()) {
    const double D = (np.problem->initial_point() - np.problem->solution()->x_star).norm();
    for (const auto& v : variants) {
      auto runs = run_seeds(*np.problem, v.spec, kSteps, 1, seeds, o.threads);
      CheckReport mono;
      mono.name = "monotone_" + v.name + "_" + np.name;
      double bounded = 0.0;
      double min_step = 0.0;
      bool failed = false;
      for (const auto& r : runs) {
        failed = failed || r.failed;
        std::vector<double> series;
        series.reserve(r.rows.size());
        for (std::size_t t = 0; t < r.rows.size(); ++t) {
          series.push_back(v.anchor ? r.diagnostics[t].anchor_dist : r.rows[t].dist_to_opt);
          bounded = std::max(bounded, r.rows[t].dist_to_opt / (D + kMonoTol));
          if (t + 1 < r.rows.size()) min_step = std::min(min_step, r.rows[t].stepsize);
        }
        const CheckReport one = check_monotone(series, kMonoTol);
        mono.passed = mono.passed && one.passed;
        mono.worst_ratio = std::max(mono.worst_ratio, one.worst_ratio);
      }
      if (failed) {
        mono.passed = false;
        mono.note = "a run failed";
      }
      res.reports.push_back(mono);
      if (v.anchor) res.reports.push_back(ratio_report("bounded_" + v.name.substr(0, v.name.size() - 2) + "_x_" + np.name, bounded, 1.0));
      res.reports.push_back(
          ratio_report("nonnegative_steps_" + v.name + "_" + np.name, min_step < 0.0 ? kInf : 0.0, 1.0));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> at_checkpoints(const std::vector<RunRecord>& runs,
                                                      const std::vector<std::int64_t>& ts,
                                                      double (*get)(const RunRecord&, std::size_t)) {
  std::vector<std::pair<double, double>> out;
  for (std::int64_t t : ts) out.emplace_back(static_cast<double>(t), seed_mean(runs, static_cast<std::size_t>(t), get));
  return out;
}

double cesaro_gap_at(const RunRecord& r, std::size_t t) { return r.diagnostics[t].cesaro_gap; }
double gap_at(const RunRecord& r, std::size_t t) { return r.diagnostics[t].gap; }
double gap_prev_at(const RunRecord& r, std::size_t t) { return r.diagnostics[t - 1].gap; }
double dist_sq_at(const RunRecord& r, std::size_t t) { return std::pow(r.rows[t].dist_to_opt, 2); }

CheckReport rate_report(const std::string& name, const std::vector<std::pair<double, double>>& pts,
                        const RateCertificate& cert) {
  return check_rate(pts, cert, kSlack, name);
}

SuiteResult rates_nonsmooth(const VerifyOptions& o) {
  SuiteResult res{"rates_nonsmooth", {}};
  const auto seeds = seeds_of(o);
  const auto steps = kCheckpoints.back();
  AbsoluteLossRegression p = gen_absolute(100, 10, true, 0.0, false, 0);
  const ProblemConstants c = p.constants(p.initial_point());

  auto sps = run_seeds(p, sps_star(), steps, 1, seeds, o.threads);
  res.reports.push_back(rate_report("nonsmooth_avg_sps", at_checkpoints(sps, kCheckpoints, cesaro_gap_at),
                                    certificate(CertificateKind::NonsmoothAvg, c)));
  auto ia = run_seeds(p, iam(LambdaSchedule::linear()), steps, 1, seeds, o.threads);
  res.reports.push_back(rate_report("iam_nonsmooth_last", at_checkpoints(ia, kCheckpoints, gap_at),
                                    certificate(CertificateKind::IamNonsmoothLast, c)));
  return res;
}

SuiteResult rates_smooth(const VerifyOptions& o) {
  SuiteResult res{"rates_smooth", {}};
  const auto seeds = seeds_of(o);
  const auto steps = kCheckpoints.back();

  for (bool interp : {false, true}) {
    const std::string tag = interp ? "_interp" : "_noninterp";
    QuadraticFiniteSum p = gen_quadratic(100, 10, interp, 0.1, 0);
    const ProblemConstants c = p.constants(p.initial_point());
    auto sps = run_seeds(p, sps_star(), steps, 1, seeds, o.threads);
    const auto avg_pts = at_checkpoints(sps, kCheckpoints, cesaro_gap_at);
    res.reports.push_back(rate_report("smooth_avg_sps" + tag, avg_pts, certificate(CertificateKind::SmoothAvg, c)));
    res.reports.push_back(
        rate_report("smooth_avg_sigma_sps" + tag, avg_pts, certificate(CertificateKind::SmoothAvgSigma, c)));

    auto ia = run_seeds(p, iam(LambdaSchedule::linear()), steps, 1, seeds, o.threads);
    const RateCertificate last = certificate(CertificateKind::IamSmoothLast, c);
    res.reports.push_back(rate_report("iam_smooth_last_prev" + tag, at_checkpoints(ia, kCheckpoints, gap_prev_at), last));
    res.reports.push_back(rate_report("iam_smooth_last" + tag, at_checkpoints(ia, kCheckpoints, gap_at), last));

    if (interp) {
      std::vector<std::int64_t> grid;
      for (int k = 0; k <= 8; ++k) grid.push_back(static_cast<std::int64_t>(std::llround(100.0 * std::pow(10.0, k / 4.0))));
      const auto pts = at_checkpoints(sps, grid, cesaro_gap_at);
      bool positive = true;
      for (const auto& pt : pts) positive = positive && pt.second > 0.0;
      const double slope = positive ? loglog_slope(pts) : kInf;
      const double ratio = slope < 0.0 ? -0.9 / slope : kInf;
      res.reports.push_back(ratio_report("slope_avg_sps_interp", ratio, 1.0, "slope " + fmt(slope)));
    }
  }
  return res;
}

SuiteResult rates_strong(const VerifyOptions& o) {
  SuiteResult res{"rates_strong", {}};
  const auto seeds = seeds_of(o);
  QuadraticFiniteSum p = gen_quadratic(100, 10, false, 0.1, 0);
  const ProblemConstants c = p.constants(p.initial_point());
  const RateCertificate cert = certificate(CertificateKind::StrongConvexDist, c);
  auto sps = run_seeds(p, sps_star(), kCheckpoints.back(), 1, seeds, o.threads);
  CheckReport r = rate_report("strong_convex_dist_sps", at_checkpoints(sps, kCheckpoints, dist_sq_at), cert);
  r.note += (r.note.empty() ? "" : "; ") + std::string("window starts at t = ") + fmt(cert.threshold);
  res.reports.push_back(r);
  return res;
}

// ---------------------------------------------------------------------------

/// Drives heavy ball with the mapped (beta, gamma) next to IAM on one sample
/// stream. A step with eta = 0 has no mapping; it is skipped by copying IAM's
/// next iterate and setting m so that the following mapped step, computed with
/// a unit reference eta, reproduces IAM again.
CheckReport heavy_ball_match(const StochasticOracle& p, LambdaSchedule sched, const std::string& name) {
  constexpr int kSteps = 100;
  RandomSource sampler = make_rng(0).split("sampler");
  const Vec x0 = p.initial_point();
  IamState s = IamState::init(x0, sched, OptLossMode::theoretical());
  HeavyBallState hb = HeavyBallState::init(x0);
  double eta_prev = 0.0;
  double worst = 0.0;
  int compared = 0;
  int skipped = 0;
  for (int t = 0; t < kSteps; ++t) {
    const BatchSample batch = sample_batch(sampler, p.size(), 1);
    IamStep st = iam_step(s, batch, p);
    if (st.eta == 0.0) {
      ++skipped;
      hb.m = -(1.0 + sched.at(t + 1)) * (st.state.x - s.x);
      hb.x = st.state.x;
      hb.t = t + 1;
      eta_prev = 1.0;
    } else {
      const Evaluation ev = p.eval(batch, hb.x);
      const MomentumParams mp = momentum_params_from_iam(sched.at(t), sched.at(t + 1), eta_prev, st.eta);
      hb = heavy_ball_step(hb, ev.grad, mp.beta, mp.gamma);
      const double scale = std::max(st.state.x.norm(), std::numeric_limits<double>::min());
      worst = std::max(worst, (hb.x - st.state.x).norm() / scale);
      ++compared;
      eta_prev = st.eta;
    }
    s = std::move(st.state);
  }
  return ratio_report(name, compared > 0 ? worst / 1e-10 : kInf, 1.0,
                      "compared " + std::to_string(compared) + " steps, skipped " + std::to_string(skipped));
}

SuiteResult equivalence(const VerifyOptions&) {
  SuiteResult res{"equivalence", {}};
  QuadraticFiniteSum p = gen_quadratic(100, 10, false, 0.1, 0);
  res.reports.push_back(heavy_ball_match(p, LambdaSchedule::linear(), "heavy_ball_iam_linear"));
  res.reports.push_back(heavy_ball_match(p, LambdaSchedule::constant(9.0), "heavy_ball_iam_9"));

  // lambda = 0 collapses IAM onto SPS*
  auto a = run_single(p, sps_star(), 100, 1, 0);
  auto b = run_single(p, iam(LambdaSchedule::constant(0.0)), 100, 1, 0);
  res.reports.push_back(ratio_report("iam_lambda0_equals_sps", a == b ? 0.0 : kInf, 1.0));
  return res;
}

// ---------------------------------------------------------------------------

SuiteResult misspecification(const VerifyOptions& o) {
  SuiteResult res{"misspecification", {}};
  const auto seeds = seeds_of(o);
  constexpr std::int64_t kSteps = 3000;
  constexpr Index kBatch = 4;
  OptimizerSpec sgdm = sgd(0.0, 0.9);
  sgdm.lr_rule = LrRule::Theory;

  for (bool interp : {true, false}) {
    const std::string tag = interp ? "_interp" : "_noninterp";
    QuadraticFiniteSum p = gen_quadratic(100, 10, interp, 0.1, 0);
    const LambdaSchedule nine = LambdaSchedule::constant(9.0);
    auto theo = run_seeds(p, iam(nine, OptLossMode::theoretical()), kSteps, kBatch, seeds, o.threads);
    auto mom = run_seeds(p, sgdm, kSteps, kBatch, seeds, o.threads);
    const double l_theo = final_loss(theo), l_mom = final_loss(mom);
    res.reports.push_back(ratio_report("iam_theoretical_vs_sgdm" + tag, l_theo / l_mom, 1.05,
                                       "iam " + fmt(l_theo) + ", sgd-m " + fmt(l_mom)));
    if (interp) {
      const double g = final_gap(theo);
      res.reports.push_back(ratio_report("iam_theoretical_reaches_optimum" + tag, g / 1e-6, 1.0, "gap " + fmt(g)));
      continue;
    }
    auto zero = run_seeds(p, iam(nine, OptLossMode::zero()), kSteps, kBatch, seeds, o.threads);
    auto avg = run_seeds(p, iam(nine, OptLossMode::averaged()), kSteps, kBatch, seeds, o.threads);
    const double g_theo = final_gap(theo), g_zero = final_gap(zero), g_avg = final_gap(avg);
    res.reports.push_back(ratio_report("zero_gap_vs_theoretical" + tag, 10.0 * g_theo / g_zero, 1.0,
                                       "theoretical " + fmt(g_theo) + ", zero " + fmt(g_zero)));
    res.reports.push_back(ratio_report("averaged_between" + tag, std::max(g_theo / g_avg, g_avg / g_zero), 1.0,
                                       "averaged " + fmt(g_avg)));
  }
  return res;
}

// ---------------------------------------------------------------------------

constexpr Index kPoissonN = 1000;
constexpr Index kPoissonD = 10;
constexpr double kPoissonScale = 1.0;

SuiteResult poisson(const VerifyOptions& o) {
  SuiteResult res{"poisson", {}};
  const auto seeds = seeds_of(o);
  PoissonRegression p = gen_poisson(kPoissonN, kPoissonD, kPoissonScale, 0);
  const double f_star = p.solution()->f_star;
  res.reports.push_back(ratio_report("poisson_optimum_positive", f_star > 0.0 ? 0.0 : kInf, 1.0, "f* " + fmt(f_star)));

  constexpr Index kBatch = 16;
  RunSpec run;
  run.epochs = 7.0;
  run.batch_size = kBatch;
  const std::int64_t steps = resolved_steps(run, p.size());

  auto ia = run_seeds(p, iam(LambdaSchedule::constant(9.0)), steps, kBatch, seeds, o.threads);
  const double l_iam = final_loss(ia);

  double best = kInf, best_lr = 0.0;
  std::string grid;
  for (double m : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0}) {
    const double lr = 0.001 * m;
    auto runs = run_seeds(p, sgd(lr), steps, kBatch, seeds, o.threads);
    const bool failed = std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed; });
    const double l = failed ? kInf : final_loss(runs);
    grid += (grid.empty() ? "" : " ") + fmt(lr) + ":" + (failed ? std::string("diverged") : fmt(l));
    if (!failed && l < best) {
      best = l;
      best_lr = lr;
    }
  }
  res.reports.push_back(ratio_report("iam_vs_best_sgd", l_iam / best, 1.05,
                                     "iam " + fmt(l_iam) + ", best sgd lr " + fmt(best_lr) + " loss " + fmt(best) +
                                         "; grid " + grid));
  return res;
}

// ---------------------------------------------------------------------------

constexpr Index kDistillN = 2000;
constexpr Index kDistillTeacher = 10;
constexpr Index kDistillStudent = 10;
constexpr double kDistillNoise = 0.5;
constexpr Index kDistillBatch = 8;

double adam_iam_gap(const StochasticOracle& p, const std::vector<std::uint64_t>& seeds, std::int64_t steps,
                    double eps_pre) {
  double worst = 0.0;
  for (std::uint64_t seed : seeds) {
    RandomSource sampler = make_rng(seed).split("sampler");
    const Vec x0 = p.initial_point();
    const LambdaSchedule nine = LambdaSchedule::constant(9.0);
    IamState plain = IamState::init(x0, nine, OptLossMode::teacher());
    IamState adam = IamState::init(x0, nine, OptLossMode::teacher(), AdamPreconditioner::zeros(p.dim(), 1.0, eps_pre));
    for (std::int64_t t = 0; t < steps; ++t) {
      const BatchSample batch = sample_batch(sampler, p.size(), kDistillBatch);
      plain = iam_step(plain, batch, p).state;
      adam = iam_step(adam, batch, p).state;
      const double scale = std::max(plain.x.norm(), std::numeric_limits<double>::min());
      worst = std::max(worst, (adam.x - plain.x).norm() / scale);
    }
  }
  return worst;
}

SuiteResult distillation(const VerifyOptions& o) {
  SuiteResult res{"distillation", {}};
  const auto seeds = seeds_of(o);
  DistillationTask p = gen_distillation(kDistillN, kDistillTeacher, kDistillStudent, kDistillNoise, 0);
  const double f_star = p.solution()->f_star;
  const double teacher = p.mean_teacher_loss();
  res.reports.push_back(ratio_report("teacher_below_student_optimum", teacher / (f_star + 1e-10), 1.0,
                                     "teacher " + fmt(teacher) + ", student optimum " + fmt(f_star)));

  const std::int64_t steps = kDistillN / kDistillBatch;  // one pass
  auto ia = run_seeds(p, iam(LambdaSchedule::constant(9.0), OptLossMode::teacher()), steps, kDistillBatch, seeds,
                      o.threads);
  const double l_iam = final_loss(ia);
  res.reports.push_back(ratio_report("iam_teacher_vs_optimum", l_iam / f_star, 1.1,
                                     "iam " + fmt(l_iam) + ", optimum " + fmt(f_star)));

  double best = kInf, best_lr = 0.0;
  for (double lr : {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2}) {
    auto runs = run_seeds(p, sgd(lr, 0.9), steps, kDistillBatch, seeds, o.threads);
    const bool failed = std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed; });
    const double l = failed ? kInf : final_loss(runs);
    if (!failed && l < best) {
      best = l;
      best_lr = lr;
    }
  }
  res.reports.push_back(ratio_report("iam_teacher_vs_best_sgdm", l_iam / best, 1.05,
                                     "best sgd-m lr " + fmt(best_lr) + " loss " + fmt(best)));

  for (double eps : {1.0, 1e-8}) {
    const double gap = adam_iam_gap(p, seeds, steps, eps);
    res.reports.push_back(ratio_report("iam_adam_degenerate_matches_iam_eps_" + fmt(eps), gap / 1e-8, 1.0,
                                       "max rel iterate diff " + fmt(gap)));
  }
  return res;
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"lemmas",       "monotonicity",    "rates_nonsmooth",
                                              "rates_smooth", "rates_strong",    "equivalence",
                                              "misspecification", "poisson",     "distillation"};
  return names;
}

std::vector<std::string> expand_suite(const std::string& name) {
  if (name == "all") return suite_names();
  if (name == "rates") return {"rates_nonsmooth", "rates_smooth", "rates_strong"};
  const auto& all = suite_names();
  if (std::find(all.begin(), all.end(), name) == all.end()) throw ConfigError("unknown verify suite '" + name + "'");
  return {name};
}

SuiteResult run_suite(const std::string& suite, const VerifyOptions& o) {
  if (suite == "lemmas") return lemmas();
  if (suite == "monotonicity") return monotonicity(o);
  if (suite == "rates_nonsmooth") return rates_nonsmooth(o);
  if (suite == "rates_smooth") return rates_smooth(o);
  if (suite == "rates_strong") return rates_strong(o);
  if (suite == "equivalence") return equivalence(o);
  if (suite == "misspecification") return misspecification(o);
  if (suite == "poisson") return poisson(o);
  if (suite == "distillation") return distillation(o);
  throw ConfigError("unknown verify suite '" + suite + "' (use one of the concrete suites, rates, or all)");
}

void write_suite(const SuiteResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / ("verify_" + result.suite + ".txt"), std::ios::binary);
    f << "suite " << result.suite << '\n';
    write_report_text(f, result.reports);
    f << "result " << (result.passed() ? "PASS" : "FAIL") << '\n';
  }
  std::ofstream f(dir / ("verify_" + result.suite + ".csv"), std::ios::binary);
  write_report_csv(f, result.reports);
}

}  // namespace spslab
