#include <cmath>

#include "spslab/core.hpp"

namespace spslab {

bool all_finite(const Vec& v) { return v.allFinite(); }

std::string to_string(OptLossKind kind) {
  switch (kind) {
    case OptLossKind::Theoretical: return "theoretical";
    case OptLossKind::Averaged: return "averaged";
    case OptLossKind::Zero: return "zero";
    case OptLossKind::Teacher: return "teacher";
    case OptLossKind::Custom: return "custom";
  }
  return "?";
}

OptLossKind opt_loss_kind_from_string(std::string_view s) {
  if (s == "theoretical") return OptLossKind::Theoretical;
  if (s == "averaged") return OptLossKind::Averaged;
  if (s == "zero") return OptLossKind::Zero;
  if (s == "teacher") return OptLossKind::Teacher;
  if (s == "custom") return OptLossKind::Custom;
  throw ConfigError("unknown opt-loss mode '" + std::string(s) + "'");
}

void ProblemConstants::validate(double rel_tol) const {
  if (!(D >= 0.0)) throw ContractError("ProblemConstants: D must be >= 0");
  if (delta_star && *delta_star < -rel_tol) throw ContractError("ProblemConstants: delta_star must be >= 0");
  if (sigma_star_sq && *sigma_star_sq < 0.0) throw ContractError("ProblemConstants: sigma_star_sq must be >= 0");
  if (sigma_star_sq && L && delta_star) {
    const double rhs = 2.0 * (*L) * (*delta_star);
    if (*sigma_star_sq > rhs * (1.0 + rel_tol) + rel_tol)
      throw ContractError("ProblemConstants: sigma_star_sq exceeds 2 L delta_star");
  }
}

Evaluation StochasticOracle::eval(const BatchSample& batch, const Vec& x) const {
  if (x.size() != dim()) throw ContractError(name() + ": dimension mismatch in eval");
  if (batch.indices.empty()) throw ContractError(name() + ": empty batch");
  const double w = 1.0 / static_cast<double>(batch.indices.size());
  Evaluation ev;
  ev.grad = Vec::Zero(dim());
  for (Index i : batch.indices) {
    ev.loss += component_loss(i, x);
    add_component_grad(i, x, w, ev.grad);
  }
  ev.loss *= w;
  if (!std::isfinite(ev.loss) || !all_finite(ev.grad))
    throw NumericalError(name() + ": non-finite loss or gradient");
  return ev;
}

double StochasticOracle::full_loss(const Vec& x) const {
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) s += component_loss(i, x);
  return s / static_cast<double>(size());
}

Vec StochasticOracle::full_grad(const Vec& x) const {
  Vec g = Vec::Zero(dim());
  const double w = 1.0 / static_cast<double>(size());
  for (Index i = 0; i < size(); ++i) add_component_grad(i, x, w, g);
  return g;
}

double StochasticOracle::suboptimality(const Vec& x) const {
  if (!solution_) throw ConfigError(name() + ": solution unknown");
  return full_loss(x) - solution_->f_star;
}

double StochasticOracle::opt_loss(const BatchSample& batch, const OptLossMode& mode) const {
  switch (mode.kind) {
    case OptLossKind::Zero: return 0.0;
    case OptLossKind::Custom: return mode.custom_value;
    case OptLossKind::Averaged:
      if (!solution_) throw ConfigError(name() + ": averaged opt-loss requires a known solution");
      return solution_->f_star;
    case OptLossKind::Theoretical: {
      if (!solution_) throw ConfigError(name() + ": theoretical opt-loss requires a known solution");
      double s = 0.0;
      for (Index i : batch.indices) s += component_opt_[static_cast<std::size_t>(i)];
      return s / static_cast<double>(batch.indices.size());
    }
    case OptLossKind::Teacher: {
      auto t = teacher_loss(batch);
      if (!t) throw ConfigError(name() + ": teacher opt-loss requested but no teacher is available");
      return *t;
    }
  }
  return 0.0;
}

double StochasticOracle::excess_loss(const BatchSample& batch, const Vec&, double batch_loss,
                                     const OptLossMode& mode) const {
  return batch_loss - opt_loss(batch, mode);
}

std::optional<double> StochasticOracle::teacher_loss(const BatchSample&) const { return std::nullopt; }

void StochasticOracle::set_solution(Vec x_star) {
  component_opt_.resize(static_cast<std::size_t>(size()));
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) {
    component_opt_[static_cast<std::size_t>(i)] = component_loss(i, x_star);
    s += component_opt_[static_cast<std::size_t>(i)];
  }
  solution_ = Solution{std::move(x_star), s / static_cast<double>(size())};
}

void StochasticOracle::fill_solution_constants(const Vec& x0, ProblemConstants& c) const {
  if (x0.size() != dim()) throw ContractError(name() + ": x0 dimension mismatch");
  if (!solution_) return;
  c.D = (x0 - solution_->x_star).norm();
  c.x_star = solution_->x_star;
  c.f_star = solution_->f_star;
}

}  // namespace spslab
