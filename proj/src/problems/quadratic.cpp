#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "spslab/problems.hpp"

namespace spslab {
namespace {

double max_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

QuadraticFiniteSum::QuadraticFiniteSum(std::vector<Mat> hessians, std::vector<Vec> centers,
                                       std::vector<double> offsets)
    : hessians_(std::move(hessians)), centers_(std::move(centers)), offsets_(std::move(offsets)) {
  if (hessians_.empty()) throw ContractError("quadratic: need at least one component");
  if (centers_.size() != hessians_.size() || offsets_.size() != hessians_.size())
    throw ContractError("quadratic: hessians, centers and offsets differ in length");
  dim_ = hessians_.front().rows();
  if (dim_ <= 0) throw ContractError("quadratic: dimension must be positive");

  mean_hessian_ = Mat::Zero(dim_, dim_);
  smoothness_.reserve(hessians_.size());
  interpolated_ = true;
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    const Mat& h = hessians_[i];
    if (h.rows() != dim_ || h.cols() != dim_) throw ContractError("quadratic: hessian shape mismatch");
    if (centers_[i].size() != dim_) throw ContractError("quadratic: center dimension mismatch");
    if (!h.isApprox(h.transpose())) throw ContractError("quadratic: hessian not symmetric");
    const double lo = min_eigenvalue(h);
    if (lo < -1e-10 * std::max(1.0, max_eigenvalue(h)))
      throw ContractError("quadratic: hessian not positive semidefinite");
    smoothness_.push_back(2.0 * max_eigenvalue(h));
    mean_hessian_ += h;
    if (i > 0 && centers_[i] != centers_[0]) interpolated_ = false;
  }
  mean_hessian_ /= static_cast<double>(hessians_.size());

  try {
    set_solution(quad_solution(*this).x_star);
  } catch (const DegenerateProblemError&) {
    // leave the solution unknown
  }
}

QuadraticFiniteSum QuadraticFiniteSum::from_factors(const std::vector<Mat>& factors, std::vector<Vec> centers,
                                                    std::vector<double> offsets) {
  std::vector<Mat> hs;
  hs.reserve(factors.size());
  for (const Mat& a : factors) {
    Mat h = a.transpose() * a / static_cast<double>(a.rows());
    hs.push_back(0.5 * (h + h.transpose()));
  }
  return QuadraticFiniteSum(std::move(hs), std::move(centers), std::move(offsets));
}

double QuadraticFiniteSum::component_loss(Index i, const Vec& x) const {
  const Vec e = x - center(i);
  return e.dot(hessian(i) * e) + offset(i);
}

void QuadraticFiniteSum::add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const {
  grad.noalias() += (2.0 * weight) * (hessian(i) * (x - center(i)));
}

Evaluation QuadraticFiniteSum::eval(const BatchSample& batch, const Vec& x) const {
  if (x.size() != dim_) throw ContractError("quadratic: dimension mismatch in eval");
  if (batch.indices.empty()) throw ContractError("quadratic: empty batch");
  const double w = 1.0 / static_cast<double>(batch.indices.size());
  Evaluation ev;
  ev.grad = Vec::Zero(dim_);
  for (Index i : batch.indices) {
    const Vec e = x - center(i);
    const Vec he = hessian(i) * e;
    ev.loss += e.dot(he) + offset(i);
    ev.grad.noalias() += (2.0 * w) * he;
  }
  ev.loss *= w;
  if (!std::isfinite(ev.loss) || !all_finite(ev.grad)) throw NumericalError("quadratic: non-finite evaluation");
  return ev;
}

double QuadraticFiniteSum::full_loss(const Vec& x) const {
  if (!solution_) return StochasticOracle::full_loss(x);
  return solution_->f_star + suboptimality(x);
}

Vec QuadraticFiniteSum::full_grad(const Vec& x) const {
  if (!solution_) return StochasticOracle::full_grad(x);
  return 2.0 * (mean_hessian_ * (x - solution_->x_star));
}

double QuadraticFiniteSum::suboptimality(const Vec& x) const {
  if (!solution_) throw ConfigError("quadratic: solution unknown");
  const Vec e = x - solution_->x_star;
  return e.dot(mean_hessian_ * e);
}

double QuadraticFiniteSum::excess_loss(const BatchSample& batch, const Vec& x, double batch_loss,
                                       const OptLossMode& mode) const {
  if (mode.kind != OptLossKind::Theoretical || !solution_)
    return StochasticOracle::excess_loss(batch, x, batch_loss, mode);
  // f_i(x) - f_i(x*) = (x - x*)^T H_i ((x - c_i) + (x* - c_i))
  const Vec& xs = solution_->x_star;
  const Vec e = x - xs;
  double s = 0.0;
  for (Index i : batch.indices) {
    const Vec sum = (x - center(i)) + (xs - center(i));
    s += e.dot(hessian(i) * sum);
  }
  return s / static_cast<double>(batch.indices.size());
}

double QuadraticFiniteSum::max_smoothness() const {
  return *std::max_element(smoothness_.begin(), smoothness_.end());
}

ProblemConstants QuadraticFiniteSum::constants(const Vec& x0) const {
  ProblemConstants c;
  fill_solution_constants(x0, c);
  c.L = max_smoothness();
  c.mu = 2.0 * min_eigenvalue(mean_hessian_);
  if (solution_) {
    const Vec& xs = solution_->x_star;
    // inf f_i = offset_i, so f* - mean inf f_i is the mean of (x*-c_i)^T H_i (x*-c_i)
    double delta = 0.0;
    double sig = 0.0;
    for (Index i = 0; i < size(); ++i) {
      const Vec e = xs - center(i);
      const Vec he = hessian(i) * e;
      delta += e.dot(he);
      sig += 4.0 * he.squaredNorm();
    }
    c.delta_star = delta / static_cast<double>(size());
    c.sigma_star_sq = sig / static_cast<double>(size());
  }
  return c;
}

QuadraticSolution quad_solution(const QuadraticFiniteSum& p) {
  const Mat& hbar = p.mean_hessian();
  const double lo = min_eigenvalue(hbar);
  const double hi = max_eigenvalue(hbar);
  if (!(lo > 1e-12 * std::max(1.0, hi))) throw DegenerateProblemError("quadratic: mean hessian is singular");

  QuadraticSolution sol;
  if (p.interpolated()) {
    sol.x_star = p.center(0);
  } else {
    Vec rhs = Vec::Zero(p.dim());
    for (Index i = 0; i < p.size(); ++i) rhs.noalias() += p.hessian(i) * p.center(i);
    rhs /= static_cast<double>(p.size());
    sol.x_star = hbar.ldlt().solve(rhs);
  }
  double f = 0.0;
  for (Index i = 0; i < p.size(); ++i) f += p.component_loss(i, sol.x_star);
  sol.f_star = f / static_cast<double>(p.size());
  return sol;
}

QuadraticFiniteSum gen_quadratic(Index n, Index d, bool interpolated, double nu, std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw ContractError("gen_quadratic: n and d must be positive");
  if (!(nu >= 0.0)) throw ContractError("gen_quadratic: nu must be >= 0");
  RandomSource root = make_rng(seed).split("problem");
  RandomSource fac = root.split("factors");
  RandomSource cen = root.split("centers");
  RandomSource off = root.split("offsets");

  std::vector<Mat> factors;
  factors.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Mat a(3 * d, d);
    for (Index r = 0; r < a.rows(); ++r)
      for (Index k = 0; k < d; ++k) a(r, k) = fac.normal();
    factors.push_back(std::move(a));
  }

  const Vec xbar = cen.normal_vector(d);
  std::vector<Vec> centers;
  centers.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (interpolated) {
      centers.push_back(xbar);
    } else {
      centers.push_back(xbar + 0.05 * cen.normal_vector(d));
    }
  }

  // uniform on [0.5 - sqrt(3) nu, 0.5 + sqrt(3) nu] has standard deviation nu
  const double half_width = std::sqrt(3.0) * nu;
  std::vector<double> offsets;
  offsets.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double u = off.uniform();
    offsets.push_back(std::max(0.0, 0.5 + half_width * (2.0 * u - 1.0)));
  }

  return QuadraticFiniteSum::from_factors(factors, std::move(centers), std::move(offsets));
}

}  // namespace spslab
