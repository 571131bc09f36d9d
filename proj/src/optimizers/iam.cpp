#include <algorithm>
#include <cmath>

#include "spslab/optimizers.hpp"

namespace spslab {

double LambdaSchedule::at(std::int64_t t) const {
  return kind == Kind::Linear ? static_cast<double>(t) : value;
}

AdamPreconditioner AdamPreconditioner::zeros(Index d, double beta2, double eps_pre) {
  AdamPreconditioner p{Vec::Zero(d), beta2, eps_pre};
  p.validate();
  return p;
}

void AdamPreconditioner::validate() const {
  if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw ContractError("adam: beta2 must be in [0, 1]");
  if (!(eps_pre > 0.0)) throw ContractError("adam: eps_pre must be > 0");
  if ((v.array() < 0.0).any()) throw ContractError("adam: v must be nonnegative");
}

void AdamPreconditioner::update(const Vec& g) {
  if (beta2 == 1.0) return;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
}

Vec AdamPreconditioner::diag() const { return v.cwiseSqrt().array() + eps_pre; }

IamState IamState::init(const Vec& x0, LambdaSchedule lambda, OptLossMode optloss,
                        std::optional<AdamPreconditioner> precondition) {
  if (lambda.kind == LambdaSchedule::Kind::Constant && !(lambda.value >= 0.0))
    throw ContractError("iam: constant lambda must be >= 0");
  if (precondition) {
    if (precondition->v.size() != x0.size()) throw ContractError("iam: preconditioner dimension mismatch");
    precondition->validate();
  }
  return IamState{x0, x0, 0, lambda, optloss, std::move(precondition)};
}

double iam_stepsize_from_excess(double excess, const Vec& grad, const Vec& z_prev, const Vec& x,
                                const AdamPreconditioner* pre) {
  if (grad.size() != x.size() || z_prev.size() != x.size()) throw ContractError("iam_stepsize: dimension mismatch");
  double denom = 0.0;
  if (pre) {
    denom = (grad.array().square() / pre->diag().array()).sum();
  } else {
    denom = grad.squaredNorm();
  }
  if (denom == 0.0) return 0.0;
  const double num = excess + grad.dot(z_prev - x);
  return std::max(0.0, num) / denom;
}

double iam_stepsize(double loss, double opt_loss, const Vec& grad, const Vec& z_prev, const Vec& x,
                    const AdamPreconditioner* pre) {
  return iam_stepsize_from_excess(loss - opt_loss, grad, z_prev, x, pre);
}

IamStep iam_step(const IamState& state, const BatchSample& batch, const StochasticOracle& problem) {
  Evaluation ev = problem.eval(batch, state.x);
  IamStep out;
  out.state = state;
  IamState& s = out.state;
  const double excess = problem.excess_loss(batch, state.x, ev.loss, state.optloss);
  if (s.precondition) s.precondition->update(ev.grad);
  const AdamPreconditioner* pre = s.precondition ? &*s.precondition : nullptr;
  out.eta = iam_stepsize_from_excess(excess, ev.grad, state.z, state.x, pre);
  if (pre) {
    s.z = state.z - out.eta * (ev.grad.array() / pre->diag().array()).matrix();
  } else {
    s.z = state.z - out.eta * ev.grad;
  }
  const double lam = s.lambda.at(state.t + 1);
  s.x = (lam / (1.0 + lam)) * state.x + (1.0 / (1.0 + lam)) * s.z;
  s.t = state.t + 1;
  if (!all_finite(s.x) || !all_finite(s.z))
    throw NumericalError("iam_step: non-finite state at t = " + std::to_string(state.t));
  out.batch_loss = ev.loss;
  out.grad = std::move(ev.grad);
  return out;
}

}  // namespace spslab
