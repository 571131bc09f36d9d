#include <cmath>

#include "spslab/optimizers.hpp"

namespace spslab {

MomentumParams momentum_params_from_iam(double lambda_t, double lambda_next, double eta_prev, double eta_t) {
  if (lambda_t < 0.0 || lambda_next < 0.0) throw ContractError("momentum_params: lambda must be >= 0");
  MomentumParams p;
  p.gamma = eta_t / (1.0 + lambda_next);
  if (lambda_t == 0.0) {
    p.beta = 0.0;
  } else if (eta_t == 0.0) {
    p.beta = 0.0;
    p.beta_defined = false;
  } else {
    p.beta = lambda_t / (1.0 + lambda_t) * (eta_prev / eta_t);
  }
  return p;
}

HeavyBallState HeavyBallState::init(const Vec& x0) { return {x0, Vec::Zero(x0.size()), 0}; }

HeavyBallState heavy_ball_step(const HeavyBallState& state, const Vec& g, double beta, double gamma) {
  HeavyBallState next;
  next.m = beta * state.m + g;
  next.x = state.x - gamma * next.m;
  next.t = state.t + 1;
  return next;
}

SgdSchedule SgdSchedule::finite_horizon(double gamma0, double variance, std::int64_t horizon,
                                        std::optional<double> L) {
  if (!(gamma0 > 0.0)) throw ContractError("sgd: gamma0 must be > 0");
  if (!(variance >= 0.0)) throw ContractError("sgd: variance must be >= 0");
  if (horizon < 0) throw ContractError("sgd: horizon must be >= 0");
  if (L && gamma0 > 1.0 / (4.0 * *L)) throw ContractError("sgd: finite-horizon gamma0 must be <= 1/(4L)");
  return {Kind::FiniteHorizon, gamma0, variance, horizon};
}

double SgdSchedule::at(std::int64_t t) const {
  switch (kind) {
    case Kind::Constant: return gamma0;
    case Kind::InvSqrt: return gamma0 / std::sqrt(static_cast<double>(t) + 1.0);
    case Kind::FiniteHorizon: return gamma0 / std::sqrt(variance * static_cast<double>(horizon) + 1.0);
  }
  return gamma0;
}

Vec sgd_step(const Vec& x, const Vec& g, double gamma) { return x - gamma * g; }

SgdMomentumState SgdMomentumState::init(const Vec& x0) { return {x0, Vec::Zero(x0.size())}; }

SgdMomentumState sgd_momentum_step(const SgdMomentumState& state, const Vec& g, double beta, double gamma) {
  SgdMomentumState next;
  next.m = beta * state.m + (1.0 - beta) * g;
  next.x = state.x - gamma * next.m;
  return next;
}

// ---------------------------------------------------------------------------

std::string to_string(Method m) {
  switch (m) {
    case Method::Sps: return "sps";
    case Method::SpsMax: return "sps_max";
    case Method::SpsDamp: return "sps_damp";
    case Method::Iam: return "iam";
    case Method::IamAdam: return "iam_adam";
    case Method::Sgd: return "sgd";
    case Method::SgdM: return "sgd_m";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::Sps, Method::SpsMax, Method::SpsDamp, Method::Iam, Method::IamAdam, Method::Sgd,
                   Method::SgdM})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown optimizer method '" + std::string(s) + "'");
}

std::string to_string(LrRule r) {
  switch (r) {
    case LrRule::Constant: return "constant";
    case LrRule::InvSqrt: return "invsqrt";
    case LrRule::FiniteHorizon: return "finite_horizon";
    case LrRule::Theory: return "theory";
  }
  return "?";
}

LrRule lr_rule_from_string(std::string_view s) {
  for (LrRule r : {LrRule::Constant, LrRule::InvSqrt, LrRule::FiniteHorizon, LrRule::Theory})
    if (s == to_string(r)) return r;
  throw ConfigError("unknown learning-rate rule '" + std::string(s) + "'");
}

namespace {

class SpsOptimizer final : public Optimizer {
 public:
  SpsOptimizer(const Vec& x0, SpsConfig cfg) : x_(x0), cfg_(cfg) { cfg_.validate(); }
  StepInfo step(const BatchSample& batch, const StochasticOracle& problem) override {
    SpsStep s = sps_step(x_, batch, problem, cfg_);
    x_ = std::move(s.x_next);
    return {s.batch_loss, s.gamma};
  }
  const Vec& x() const override { return x_; }

 private:
  Vec x_;
  SpsConfig cfg_;
};

class IamOptimizer final : public Optimizer {
 public:
  explicit IamOptimizer(IamState s) : state_(std::move(s)) {}
  StepInfo step(const BatchSample& batch, const StochasticOracle& problem) override {
    IamStep s = iam_step(state_, batch, problem);
    state_ = std::move(s.state);
    return {s.batch_loss, s.eta};
  }
  const Vec& x() const override { return state_.x; }
  std::optional<Vec> anchor() const override { return state_.z; }

 private:
  IamState state_;
};

class SgdOptimizer final : public Optimizer {
 public:
  SgdOptimizer(const Vec& x0, SgdSchedule schedule, std::optional<double> momentum)
      : x_(x0), m_(Vec::Zero(x0.size())), schedule_(schedule), momentum_(momentum) {}
  StepInfo step(const BatchSample& batch, const StochasticOracle& problem) override {
    Evaluation ev = problem.eval(batch, x_);
    const double gamma = schedule_.at(t_++);
    if (momentum_) {
      SgdMomentumState s = sgd_momentum_step({x_, m_}, ev.grad, *momentum_, gamma);
      x_ = std::move(s.x);
      m_ = std::move(s.m);
    } else {
      x_ = sgd_step(x_, ev.grad, gamma);
    }
    if (!all_finite(x_)) throw NumericalError("sgd: non-finite iterate at t = " + std::to_string(t_ - 1));
    return {ev.loss, gamma};
  }
  const Vec& x() const override { return x_; }

 private:
  Vec x_;
  Vec m_;
  SgdSchedule schedule_;
  std::optional<double> momentum_;
  std::int64_t t_ = 0;
};

SgdSchedule make_schedule(const OptimizerSpec& spec, const ProblemConstants& c, std::int64_t horizon) {
  switch (spec.lr_rule) {
    case LrRule::Constant:
      if (!(spec.lr > 0.0)) throw ConfigError("optimizer.lr must be > 0");
      return SgdSchedule::constant(spec.lr);
    case LrRule::InvSqrt:
      if (!(spec.lr > 0.0)) throw ConfigError("optimizer.lr must be > 0");
      return SgdSchedule::inv_sqrt(spec.lr);
    case LrRule::FiniteHorizon:
      try {
        return SgdSchedule::finite_horizon(spec.lr, spec.variance, horizon, c.L);
      } catch (const ContractError& e) {
        throw ConfigError(e.what());
      }
    case LrRule::Theory:
      if (!c.L || !(*c.L > 0.0)) throw ConfigError("lr_rule = theory requires the smoothness constant L");
      return SgdSchedule::constant(1.0 / (4.0 * *c.L));
  }
  return SgdSchedule::constant(spec.lr);
}

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, const Vec& x0, const ProblemConstants& constants,
                                          std::int64_t horizon) {
  switch (spec.method) {
    case Method::Sps:
      return std::make_unique<SpsOptimizer>(x0, SpsConfig{SpsVariant::Star, spec.gamma_b, spec.epsilon, spec.optloss});
    case Method::SpsMax:
      return std::make_unique<SpsOptimizer>(x0, SpsConfig{SpsVariant::Max, spec.gamma_b, spec.epsilon, spec.optloss});
    case Method::SpsDamp:
      return std::make_unique<SpsOptimizer>(x0, SpsConfig{SpsVariant::Damp, spec.gamma_b, spec.epsilon, spec.optloss});
    case Method::Iam:
      return std::make_unique<IamOptimizer>(IamState::init(x0, spec.lambda, spec.optloss));
    case Method::IamAdam:
      return std::make_unique<IamOptimizer>(
          IamState::init(x0, spec.lambda, spec.optloss, AdamPreconditioner::zeros(x0.size(), spec.beta2, spec.eps_pre)));
    case Method::Sgd:
      return std::make_unique<SgdOptimizer>(x0, make_schedule(spec, constants, horizon), std::nullopt);
    case Method::SgdM:
      if (!(spec.momentum >= 0.0 && spec.momentum < 1.0)) throw ConfigError("optimizer.momentum must be in [0, 1)");
      return std::make_unique<SgdOptimizer>(x0, make_schedule(spec, constants, horizon), spec.momentum);
  }
  throw ConfigError("unsupported optimizer");
}

}  // namespace spslab
