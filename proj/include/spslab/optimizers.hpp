#pragma once

// Step-size rules and update schemes. Every step function is a pure map from
// (state, sample, problem) to the next state; the Optimizer wrapper at the
// bottom gives the runner one interface over all of them.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "spslab/core.hpp"

namespace spslab {

/// (loss - opt_loss)_+ / grad_norm_sq, and 0 when grad_norm_sq is 0.
double polyak_stepsize(double loss, double opt_loss, double grad_norm_sq);

// ---------------------------------------------------------------------------
// SPS family

enum class SpsVariant { Star, Max, Damp };

struct SpsConfig {
  SpsVariant variant = SpsVariant::Star;
  double gamma_b = 1.0;  // Max only
  double epsilon = 0.0;  // Damp only
  OptLossMode optloss;

  void validate() const;
};

/// Step size from an already computed excess loss f_xi(x) - opt_loss.
double sps_stepsize(double excess, double grad_norm_sq, const SpsConfig& cfg);

struct SpsStep {
  Vec x_next;
  double gamma = 0.0;
  double batch_loss = 0.0;
};

SpsStep sps_step(const Vec& x, const BatchSample& batch, const StochasticOracle& problem, const SpsConfig& cfg);

// ---------------------------------------------------------------------------
// IAM

/// lambda_t = t, or a constant.
struct LambdaSchedule {
  enum class Kind { Linear, Constant };
  Kind kind = Kind::Constant;
  double value = 9.0;

  static LambdaSchedule linear() { return {Kind::Linear, 0.0}; }
  static LambdaSchedule constant(double v) { return {Kind::Constant, v}; }
  double at(std::int64_t t) const;
  bool operator==(const LambdaSchedule&) const = default;
};

/// Diagonal Adam second-moment preconditioner, D = diag(sqrt(v) + eps_pre).
/// beta2 = 1 freezes v at its initial value.
struct AdamPreconditioner {
  Vec v;
  double beta2 = 0.999;
  double eps_pre = 1e-8;

  static AdamPreconditioner zeros(Index d, double beta2 = 0.999, double eps_pre = 1e-8);
  void validate() const;
  void update(const Vec& g);
  Vec diag() const;
};

struct IamState {
  Vec x;
  Vec z;  // z_{t-1}
  std::int64_t t = 0;
  LambdaSchedule lambda;
  OptLossMode optloss;
  std::optional<AdamPreconditioner> precondition;

  /// z_{-1} = x_0.
  static IamState init(const Vec& x0, LambdaSchedule lambda, OptLossMode optloss,
                       std::optional<AdamPreconditioner> precondition = std::nullopt);
};

/// [loss - opt_loss + <g, z_prev - x>]_+ / ||g||^2_{D^-1}; 0 if the norm is 0.
double iam_stepsize(double loss, double opt_loss, const Vec& grad, const Vec& z_prev, const Vec& x,
                    const AdamPreconditioner* pre = nullptr);
/// Same rule with the loss difference supplied directly.
double iam_stepsize_from_excess(double excess, const Vec& grad, const Vec& z_prev, const Vec& x,
                                const AdamPreconditioner* pre = nullptr);

struct IamStep {
  IamState state;
  double eta = 0.0;
  double batch_loss = 0.0;
  Vec grad;
};

IamStep iam_step(const IamState& state, const BatchSample& batch, const StochasticOracle& problem);

// ---------------------------------------------------------------------------
// Heavy ball and the IAM correspondence

struct MomentumParams {
  double beta = 0.0;
  double gamma = 0.0;
  /// false when eta_t = 0 and beta has no value (beta is then reported as 0).
  bool beta_defined = true;
};

/// beta_t = lambda_t/(1+lambda_t) * eta_prev/eta_t, gamma_t = eta_t/(1+lambda_next).
/// Pass eta_prev = 0 at t = 0.
MomentumParams momentum_params_from_iam(double lambda_t, double lambda_next, double eta_prev, double eta_t);

struct HeavyBallState {
  Vec x;
  Vec m;
  std::int64_t t = 0;

  static HeavyBallState init(const Vec& x0);
};

/// m <- beta m + g; x <- x - gamma m.
HeavyBallState heavy_ball_step(const HeavyBallState& state, const Vec& g, double beta, double gamma);

// ---------------------------------------------------------------------------
// SGD baselines

struct SgdSchedule {
  enum class Kind { Constant, InvSqrt, FiniteHorizon };
  Kind kind = Kind::Constant;
  double gamma0 = 0.01;
  double variance = 0.0;       // v, FiniteHorizon only
  std::int64_t horizon = 0;    // T, FiniteHorizon only

  static SgdSchedule constant(double gamma) { return {Kind::Constant, gamma, 0.0, 0}; }
  static SgdSchedule inv_sqrt(double gamma0) { return {Kind::InvSqrt, gamma0, 0.0, 0}; }
  /// Rejects gamma0 > 1/(4L) when L is given.
  static SgdSchedule finite_horizon(double gamma0, double variance, std::int64_t horizon,
                                    std::optional<double> L = std::nullopt);
  double at(std::int64_t t) const;
};

Vec sgd_step(const Vec& x, const Vec& g, double gamma);

/// Dampened momentum: m <- beta m + (1 - beta) g; x <- x - gamma m.
struct SgdMomentumState {
  Vec x;
  Vec m;
  static SgdMomentumState init(const Vec& x0);
};

SgdMomentumState sgd_momentum_step(const SgdMomentumState& state, const Vec& g, double beta, double gamma);

// ---------------------------------------------------------------------------
// Uniform driver

enum class Method { Sps, SpsMax, SpsDamp, Iam, IamAdam, Sgd, SgdM };

std::string to_string(Method m);
Method method_from_string(std::string_view s);

enum class LrRule { Constant, InvSqrt, FiniteHorizon, Theory };

std::string to_string(LrRule r);
LrRule lr_rule_from_string(std::string_view s);

/// Everything needed to build any optimizer. Fields unused by a method are
/// ignored.
struct OptimizerSpec {
  Method method = Method::Iam;
  OptLossMode optloss;
  double gamma_b = 1.0;
  double epsilon = 0.0;
  LambdaSchedule lambda;
  double beta2 = 0.999;
  double eps_pre = 1e-8;
  double lr = 0.01;
  LrRule lr_rule = LrRule::Constant;
  double momentum = 0.9;
  double variance = 0.0;

  bool operator==(const OptimizerSpec&) const = default;
};

struct StepInfo {
  double batch_loss = 0.0;
  double stepsize = 0.0;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual StepInfo step(const BatchSample& batch, const StochasticOracle& problem) = 0;
  virtual const Vec& x() const = 0;
  /// z_{t-1} for averaging methods.
  virtual std::optional<Vec> anchor() const { return std::nullopt; }
};

/// `horizon` is the planned number of steps (FiniteHorizon); the theory rule
/// sets lr = 1/(4L) from constants.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, const Vec& x0, const ProblemConstants& constants,
                                          std::int64_t horizon);

}  // namespace spslab
