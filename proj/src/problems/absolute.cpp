#include <cmath>

#include "spslab/problems.hpp"

namespace spslab {

AbsoluteLossRegression::AbsoluteLossRegression(std::vector<Vec> features, std::vector<double> targets,
                                               std::optional<Vec> interpolating_point)
    : features_(std::move(features)), targets_(std::move(targets)) {
  if (features_.empty()) throw ContractError("absolute: need at least one row");
  if (targets_.size() != features_.size()) throw ContractError("absolute: features and targets differ in length");
  dim_ = features_.front().size();
  if (dim_ <= 0) throw ContractError("absolute: dimension must be positive");
  for (const Vec& a : features_)
    if (a.size() != dim_) throw ContractError("absolute: ragged feature rows");
  if (interpolating_point) {
    if (interpolating_point->size() != dim_) throw ContractError("absolute: planted point dimension mismatch");
    set_solution(std::move(*interpolating_point));
  }
}

double AbsoluteLossRegression::component_loss(Index i, const Vec& x) const {
  return std::abs(feature(i).dot(x) - target(i));
}

void AbsoluteLossRegression::add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const {
  const double r = feature(i).dot(x) - target(i);
  if (r > 0.0) {
    grad.noalias() += weight * feature(i);
  } else if (r < 0.0) {
    grad.noalias() -= weight * feature(i);
  }
}

ProblemConstants AbsoluteLossRegression::constants(const Vec& x0) const {
  ProblemConstants c;
  fill_solution_constants(x0, c);
  double g = 0.0;
  for (const Vec& a : features_) g += a.squaredNorm();
  c.G_sq = g / static_cast<double>(size());
  if (solution_) {
    c.delta_star = solution_->f_star;  // every inf f_i is 0
    c.sigma_star_sq = 0.0;
  }
  return c;
}

AbsoluteLossRegression gen_absolute(Index n, Index d, bool interpolating, double noise, bool unit_rows,
                                    std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw ContractError("gen_absolute: n and d must be positive");
  if (!(noise >= 0.0)) throw ContractError("gen_absolute: noise must be >= 0");
  RandomSource root = make_rng(seed).split("problem");
  RandomSource rows = root.split("rows");
  RandomSource planted = root.split("planted");
  RandomSource eps = root.split("noise");

  std::vector<Vec> features;
  features.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Vec a = rows.normal_vector(d);
    if (unit_rows) {
      const double nrm = a.norm();
      if (nrm > 0.0) a /= nrm;
    }
    features.push_back(std::move(a));
  }
  const Vec xbar = planted.normal_vector(d);
  std::vector<double> targets;
  targets.reserve(static_cast<std::size_t>(n));
  for (const Vec& a : features) {
    double b = a.dot(xbar);
    if (!interpolating) b += noise * eps.normal();
    targets.push_back(b);
  }
  if (interpolating) return AbsoluteLossRegression(std::move(features), std::move(targets), xbar);
  return AbsoluteLossRegression(std::move(features), std::move(targets));
}

}  // namespace spslab
