#include <cmath>

#include "spslab/problems.hpp"

namespace spslab {

DistillationTask::DistillationTask(std::vector<Vec> features, std::vector<double> targets, Index student_dim,
                                   double ridge)
    : student_dim_(student_dim), ridge_(ridge), features_(std::move(features)), targets_(std::move(targets)) {
  if (features_.empty()) throw ContractError("distillation: need at least one sample");
  if (targets_.size() != features_.size()) throw ContractError("distillation: features and targets differ");
  const Index d_teacher = features_.front().size();
  if (student_dim_ <= 0 || student_dim_ > d_teacher)
    throw ContractError("distillation: student dimension must be in [1, teacher dimension]");
  if (!(ridge_ >= 0.0)) throw ContractError("distillation: ridge must be >= 0");
  for (const Vec& a : features_)
    if (a.size() != d_teacher) throw ContractError("distillation: ragged features");

  const double inv_n = 1.0 / static_cast<double>(features_.size());

  // teacher: (X^T X / n + ridge I) w = X^T y / n over every feature
  Mat gram = ridge_ * Mat::Identity(d_teacher, d_teacher);
  Vec rhs = Vec::Zero(d_teacher);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    gram.noalias() += inv_n * features_[i] * features_[i].transpose();
    rhs.noalias() += (inv_n * targets_[i]) * features_[i];
  }
  teacher_weights_ = gram.ldlt().solve(rhs);
  teacher_losses_.reserve(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const double r = features_[i].dot(teacher_weights_) - targets_[i];
    teacher_losses_.push_back(0.5 * r * r);
  }

  // student optimum by least squares on the leading block
  const Mat sg = gram.topLeftCorner(student_dim_, student_dim_) -
                 ridge_ * Mat::Identity(student_dim_, student_dim_);
  Vec x = sg.ldlt().solve(rhs.head(student_dim_));
  if (all_finite(x)) set_solution(std::move(x));
}

double DistillationTask::component_loss(Index i, const Vec& x) const {
  const auto& a = features_[static_cast<std::size_t>(i)];
  const double r = a.head(student_dim_).dot(x) - targets_[static_cast<std::size_t>(i)];
  return 0.5 * r * r;
}

void DistillationTask::add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const {
  const auto& a = features_[static_cast<std::size_t>(i)];
  const double r = a.head(student_dim_).dot(x) - targets_[static_cast<std::size_t>(i)];
  grad.noalias() += (weight * r) * a.head(student_dim_);
}

std::optional<double> DistillationTask::teacher_loss(const BatchSample& batch) const {
  if (batch.indices.empty()) throw ContractError("distillation: empty batch");
  double s = 0.0;
  for (Index i : batch.indices) s += teacher_component_loss(i);
  return s / static_cast<double>(batch.indices.size());
}

double DistillationTask::mean_teacher_loss() const {
  double s = 0.0;
  for (double l : teacher_losses_) s += l;
  return s / static_cast<double>(teacher_losses_.size());
}

ProblemConstants DistillationTask::constants(const Vec& x0) const {
  ProblemConstants c;
  fill_solution_constants(x0, c);
  double l = 0.0;
  for (const Vec& a : features_) l = std::max(l, a.head(student_dim_).squaredNorm());
  c.L = l;
  if (solution_) {
    // every f_i attains 0
    c.delta_star = solution_->f_star;
    double sig = 0.0;
    for (Index i = 0; i < size(); ++i) {
      Vec g = Vec::Zero(student_dim_);
      add_component_grad(i, solution_->x_star, 1.0, g);
      sig += g.squaredNorm();
    }
    c.sigma_star_sq = sig / static_cast<double>(size());
  }
  return c;
}

DistillationTask gen_distillation(Index n, Index d_teacher, Index d_student, double noise, std::uint64_t seed,
                                  double ridge) {
  if (n <= 0 || d_teacher <= 0) throw ContractError("gen_distillation: n and d_teacher must be positive");
  if (d_student <= 0 || d_student > d_teacher)
    throw ContractError("gen_distillation: need 1 <= d_student <= d_teacher");
  if (!(noise >= 0.0)) throw ContractError("gen_distillation: noise must be >= 0");
  RandomSource root = make_rng(seed).split("problem");
  RandomSource feat = root.split("features");
  RandomSource wts = root.split("weights");
  RandomSource eps = root.split("noise");

  const Vec w_true = wts.normal_vector(d_teacher);
  std::vector<Vec> features;
  std::vector<double> targets;
  features.reserve(static_cast<std::size_t>(n));
  targets.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Vec a = feat.normal_vector(d_teacher);
    targets.push_back(w_true.dot(a) + noise * eps.normal());
    features.push_back(std::move(a));
  }
  return DistillationTask(std::move(features), std::move(targets), d_student, ridge);
}

}  // namespace spslab
