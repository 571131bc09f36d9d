#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spslab/problems.hpp"

namespace spslab {

PoissonRegression::PoissonRegression(std::vector<Vec> rows, std::vector<double> counts)
    : rows_(std::move(rows)), counts_(std::move(counts)) {
  if (rows_.empty()) throw ContractError("poisson: need at least one row");
  if (counts_.size() != rows_.size()) throw ContractError("poisson: rows and counts differ in length");
  dim_ = rows_.front().size();
  if (dim_ <= 0) throw ContractError("poisson: dimension must be positive");
  for (const Vec& r : rows_)
    if (r.size() != dim_) throw ContractError("poisson: ragged rows");
  for (double y : counts_)
    if (!(y >= 0.0) || !std::isfinite(y)) throw ContractError("poisson: counts must be finite and >= 0");
}

double PoissonRegression::component_loss(Index i, const Vec& w) const {
  const double z = row(i).dot(w);
  return std::exp(z) - count(i) * z;
}

void PoissonRegression::add_component_grad(Index i, const Vec& w, double weight, Vec& grad) const {
  const double z = row(i).dot(w);
  grad.noalias() += (weight * (std::exp(z) - count(i))) * row(i);
}

bool PoissonRegression::solve(double tol, int max_iter) {
  Vec w = Vec::Zero(dim_);
  const double inv_n = 1.0 / static_cast<double>(size());
  double f = full_loss(w);
  for (int it = 0; it < max_iter; ++it) {
    Vec g = Vec::Zero(dim_);
    Mat h = Mat::Zero(dim_, dim_);
    for (Index i = 0; i < size(); ++i) {
      const double e = std::exp(row(i).dot(w));
      g.noalias() += (inv_n * (e - count(i))) * row(i);
      h.noalias() += (inv_n * e) * row(i) * row(i).transpose();
    }
    if (g.norm() <= tol) {
      set_solution(std::move(w));
      return true;
    }
    Eigen::LDLT<Mat> ldlt(h);
    if (ldlt.info() != Eigen::Success) return false;
    const Vec step = ldlt.solve(g);
    const double decrement = g.dot(step);
    // backtracking on the objective
    double t = 1.0;
    Vec next;
    double f_next = 0.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      next = w - t * step;
      f_next = full_loss(next);
      if (std::isfinite(f_next) && f_next <= f - 0.25 * t * decrement) break;
    }
    if (!std::isfinite(f_next)) return false;
    if (f_next > f && t < 1e-15) break;
    w = std::move(next);
    f = f_next;
  }
  // accept a stalled iterate if the gradient is small in floating-point terms
  const Vec g = full_grad(w);
  if (g.norm() <= 1e3 * tol) {
    set_solution(std::move(w));
    return true;
  }
  return false;
}

ProblemConstants PoissonRegression::constants(const Vec& x0) const {
  ProblemConstants c;
  fill_solution_constants(x0, c);
  if (!solution_) return c;
  c.empirical = true;
  const Vec& xs = solution_->x_star;

  double mean_inf = 0.0;
  double sig = 0.0;
  for (Index i = 0; i < size(); ++i) {
    const double y = count(i);
    // inf_z e^z - y z is y - y log y for y > 0 and 0 (not attained) for y = 0
    mean_inf += y > 0.0 ? y - y * std::log(y) : 0.0;
    sig += std::pow(std::exp(row(i).dot(xs)) - y, 2) * row(i).squaredNorm();
  }
  mean_inf /= static_cast<double>(size());
  c.delta_star = std::max(0.0, solution_->f_star - mean_inf);
  c.sigma_star_sq = sig / static_cast<double>(size());

  // sample the ball around x* of radius D
  RandomSource rng = make_rng(0).split("poisson-constants");
  double g_sq = 0.0;
  double l = 0.0;
  constexpr int kProbes = 256;
  for (int p = 0; p <= kProbes; ++p) {
    Vec w = xs;
    if (p > 0 && c.D > 0.0) {
      Vec dir = rng.normal_vector(dim_);
      const double r = c.D * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
      w += (r / dir.norm()) * dir;
    }
    double gs = 0.0;
    for (Index i = 0; i < size(); ++i) {
      const double e = std::exp(row(i).dot(w));
      gs += std::pow(e - count(i), 2) * row(i).squaredNorm();
      l = std::max(l, e * row(i).squaredNorm());
    }
    g_sq = std::max(g_sq, gs / static_cast<double>(size()));
  }
  c.G_sq = g_sq;
  c.L = l;
  return c;
}

PoissonRegression gen_poisson(Index n, Index d, double weight_scale, std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw ContractError("gen_poisson: n and d must be positive");
  if (!(weight_scale >= 0.0)) throw ContractError("gen_poisson: weight_scale must be >= 0");
  RandomSource root = make_rng(seed).split("problem");
  RandomSource feat = root.split("features");
  RandomSource planted = root.split("planted");
  RandomSource draws = root.split("counts");

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Vec> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) rows.push_back(scale * feat.normal_vector(d));
  const Vec w = weight_scale * planted.normal_vector(d);
  std::vector<double> counts;
  counts.reserve(static_cast<std::size_t>(n));
  for (const Vec& x : rows) counts.push_back(static_cast<double>(draws.poisson(std::exp(x.dot(w)))));

  PoissonRegression p(std::move(rows), std::move(counts));
  if (!p.solve()) throw NumericalError("gen_poisson: Newton solve did not converge");
  return p;
}

PoissonRegression load_poisson_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("poisson csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("poisson csv: empty file '" + path + "'");
  std::vector<Vec> rows;
  std::vector<double> counts;
  std::size_t lineno = 1;
  Index width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw ConfigError("poisson csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      cells.push_back(v);
    }
    if (cells.size() < 2) throw ConfigError("poisson csv line " + std::to_string(lineno) + ": need y and features");
    const Index d = static_cast<Index>(cells.size()) - 1;
    if (width < 0) width = d;
    if (d != width) throw ConfigError("poisson csv line " + std::to_string(lineno) + ": wrong column count");
    counts.push_back(cells[0]);
    rows.push_back(Eigen::Map<const Vec>(cells.data() + 1, d));
  }
  if (rows.empty()) throw ConfigError("poisson csv: no data rows in '" + path + "'");
  PoissonRegression p(std::move(rows), std::move(counts));
  p.solve();
  return p;
}

}  // namespace spslab
