#include <algorithm>
#include <cmath>

#include "spslab/optimizers.hpp"

namespace spslab {

double polyak_stepsize(double loss, double opt_loss, double grad_norm_sq) {
  if (grad_norm_sq < 0.0) throw ContractError("polyak_stepsize: grad_norm_sq must be >= 0");
  if (grad_norm_sq == 0.0) return 0.0;
  return std::max(0.0, loss - opt_loss) / grad_norm_sq;
}

void SpsConfig::validate() const {
  if (variant == SpsVariant::Max && !(gamma_b > 0.0)) throw ContractError("sps_max: gamma_b must be > 0");
  if (variant == SpsVariant::Damp && !(epsilon >= 0.0)) throw ContractError("sps_damp: epsilon must be >= 0");
}

double sps_stepsize(double excess, double grad_norm_sq, const SpsConfig& cfg) {
  switch (cfg.variant) {
    case SpsVariant::Star: return polyak_stepsize(excess, 0.0, grad_norm_sq);
    case SpsVariant::Max: return std::min(polyak_stepsize(excess, 0.0, grad_norm_sq), cfg.gamma_b);
    case SpsVariant::Damp: {
      if (grad_norm_sq < 0.0) throw ContractError("sps_damp: grad_norm_sq must be >= 0");
      const double denom = grad_norm_sq + cfg.epsilon;
      if (denom == 0.0) return 0.0;
      return std::max(0.0, excess) / denom;
    }
  }
  return 0.0;
}

SpsStep sps_step(const Vec& x, const BatchSample& batch, const StochasticOracle& problem, const SpsConfig& cfg) {
  cfg.validate();
  Evaluation ev = problem.eval(batch, x);
  const double excess = problem.excess_loss(batch, x, ev.loss, cfg.optloss);
  SpsStep out;
  out.batch_loss = ev.loss;
  out.gamma = sps_stepsize(excess, ev.grad.squaredNorm(), cfg);
  out.x_next = x - out.gamma * ev.grad;
  if (!all_finite(out.x_next)) throw NumericalError("sps_step: non-finite iterate");
  return out;
}

}  // namespace spslab
