#pragma once

// Concrete finite-sum problems with analytic gradients, known (or computed)
// solutions and the constants used by rate certificates.

#include <cstdint>
#include <string>
#include <vector>

#include "spslab/core.hpp"

namespace spslab {

/// Raised by quad_solution when the mean Hessian is not positive definite.
class DegenerateProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------

/// f_i(x) = (x - c_i)^T H_i (x - c_i) + f*_i with H_i = A_i^T A_i / (3d).
class QuadraticFiniteSum : public StochasticOracle {
 public:
  QuadraticFiniteSum(std::vector<Mat> hessians, std::vector<Vec> centers, std::vector<double> offsets);

  /// Builds H_i = A_i^T A_i / rows(A_i) from the factors.
  static QuadraticFiniteSum from_factors(const std::vector<Mat>& factors, std::vector<Vec> centers,
                                         std::vector<double> offsets);

  std::string name() const override { return "quadratic"; }
  Index dim() const override { return dim_; }
  Index size() const override { return static_cast<Index>(hessians_.size()); }

  double component_loss(Index i, const Vec& x) const override;
  void add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const override;
  Evaluation eval(const BatchSample& batch, const Vec& x) const override;
  double full_loss(const Vec& x) const override;
  Vec full_grad(const Vec& x) const override;
  double suboptimality(const Vec& x) const override;
  double excess_loss(const BatchSample& batch, const Vec& x, double batch_loss,
                     const OptLossMode& mode) const override;
  ProblemConstants constants(const Vec& x0) const override;

  const Mat& hessian(Index i) const { return hessians_[static_cast<std::size_t>(i)]; }
  const Vec& center(Index i) const { return centers_[static_cast<std::size_t>(i)]; }
  double offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
  const Mat& mean_hessian() const { return mean_hessian_; }
  /// L_i = 2 lambda_max(H_i)
  double component_smoothness(Index i) const { return smoothness_[static_cast<std::size_t>(i)]; }
  double max_smoothness() const;
  /// True when every center is bitwise identical.
  bool interpolated() const { return interpolated_; }

 private:
  Index dim_;
  std::vector<Mat> hessians_;
  std::vector<Vec> centers_;
  std::vector<double> offsets_;
  std::vector<double> smoothness_;
  Mat mean_hessian_;
  bool interpolated_ = false;
};

struct QuadraticSolution {
  Vec x_star;
  double f_star = 0.0;
};

/// Minimizer of the mean objective: solves Hbar x = (1/n) sum H_i c_i.
QuadraticSolution quad_solution(const QuadraticFiniteSum& p);

/// Random instance: A_i entries standard normal (3d x d), xbar standard normal,
/// centers xbar (+ 0.05 eps_i when not interpolated), offsets uniform with
/// mean 0.5 and standard deviation nu truncated at zero.
QuadraticFiniteSum gen_quadratic(Index n, Index d, bool interpolated, double nu, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// f_i(x) = |a_i^T x - b_i|, subgradient sign(r) a_i with sign(0) = 0.
class AbsoluteLossRegression : public StochasticOracle {
 public:
  AbsoluteLossRegression(std::vector<Vec> features, std::vector<double> targets,
                         std::optional<Vec> interpolating_point = std::nullopt);

  std::string name() const override { return "absolute"; }
  Index dim() const override { return dim_; }
  Index size() const override { return static_cast<Index>(features_.size()); }

  double component_loss(Index i, const Vec& x) const override;
  void add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const override;
  ProblemConstants constants(const Vec& x0) const override;

  bool interpolating() const { return has_solution(); }
  const Vec& feature(Index i) const { return features_[static_cast<std::size_t>(i)]; }
  double target(Index i) const { return targets_[static_cast<std::size_t>(i)]; }

 private:
  Index dim_;
  std::vector<Vec> features_;
  std::vector<double> targets_;
};

/// Gaussian rows (optionally normalized to unit length). When interpolating,
/// b_i = a_i^T xbar exactly; otherwise noise * N(0,1) is added.
AbsoluteLossRegression gen_absolute(Index n, Index d, bool interpolating, double noise, bool unit_rows,
                                    std::uint64_t seed);

// ---------------------------------------------------------------------------

/// f_i(w) = exp(w^T x_i) - y_i w^T x_i. Convex, neither Lipschitz nor
/// globally smooth.
class PoissonRegression : public StochasticOracle {
 public:
  PoissonRegression(std::vector<Vec> rows, std::vector<double> counts);

  std::string name() const override { return "poisson"; }
  Index dim() const override { return dim_; }
  Index size() const override { return static_cast<Index>(rows_.size()); }

  double component_loss(Index i, const Vec& w) const override;
  void add_component_grad(Index i, const Vec& w, double weight, Vec& grad) const override;
  /// Constants are sampled over the ball B_D(x*) and flagged empirical.
  ProblemConstants constants(const Vec& x0) const override;

  /// Full-batch damped Newton. Stores the solution when the gradient norm
  /// drops below tol; returns whether it converged.
  bool solve(double tol = 1e-11, int max_iter = 200);

  const Vec& row(Index i) const { return rows_[static_cast<std::size_t>(i)]; }
  double count(Index i) const { return counts_[static_cast<std::size_t>(i)]; }

 private:
  Index dim_;
  std::vector<Vec> rows_;
  std::vector<double> counts_;
};

/// Standard-normal features scaled by 1/sqrt(d); counts Poisson(exp(w^T x_i))
/// for a planted w ~ weight_scale * N(0, I). The returned problem is solved.
PoissonRegression gen_poisson(Index n, Index d, double weight_scale, std::uint64_t seed);

/// CSV with a header row; first column the count, remaining columns features.
PoissonRegression load_poisson_csv(const std::string& path);

// ---------------------------------------------------------------------------

/// Linear teacher/student regression with squared loss f_i(x) = 0.5 (a_i^T x - y_i)^2.
/// The student sees only the first student_dim features; the teacher is a
/// ridge fit over all of them and exposes its batch loss as an opt-loss oracle.
class DistillationTask : public StochasticOracle {
 public:
  DistillationTask(std::vector<Vec> features, std::vector<double> targets, Index student_dim, double ridge);

  std::string name() const override { return "distillation"; }
  Index dim() const override { return student_dim_; }
  Index size() const override { return static_cast<Index>(features_.size()); }

  double component_loss(Index i, const Vec& x) const override;
  void add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const override;
  std::optional<double> teacher_loss(const BatchSample& batch) const override;
  ProblemConstants constants(const Vec& x0) const override;

  const Vec& teacher_weights() const { return teacher_weights_; }
  double teacher_component_loss(Index i) const { return teacher_losses_[static_cast<std::size_t>(i)]; }
  double mean_teacher_loss() const;
  Index teacher_dim() const { return teacher_weights_.size(); }
  double ridge() const { return ridge_; }

 private:
  Index student_dim_;
  double ridge_;
  std::vector<Vec> features_;
  std::vector<double> targets_;
  Vec teacher_weights_;
  std::vector<double> teacher_losses_;
};

/// targets = w_true^T a + noise * N(0,1) with standard-normal features and
/// weights. Requires d_student <= d_teacher (equality gives a realizable student).
DistillationTask gen_distillation(Index n, Index d_teacher, Index d_student, double noise, std::uint64_t seed,
                                  double ridge = 1e-8);

}  // namespace spslab
