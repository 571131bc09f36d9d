#include <algorithm>
#include <cmath>

#include "spslab/analysis.hpp"

namespace spslab {
namespace {

constexpr double kSlack = 1e-12;

double pos(double v) { return v > 0.0 ? v : 0.0; }

double phi(double x, double y) { return pos(x) * pos(x) / y; }

}  // namespace

bool titu_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ContractError("titu_oracle: need equal nonempty inputs");
  double lhs = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(b[i] > 0.0)) throw ContractError("titu_oracle: b must be positive");
    lhs += phi(a[i], b[i]);
    sa += a[i];
    sb += b[i];
  }
  return lhs + kSlack >= phi(sa, sb);
}

bool adagrad_oracle(const std::vector<double>& c) {
  if (c.empty() || !(c[0] > 0.0)) throw ContractError("adagrad_oracle: need c_0 > 0");
  double s = 0.0, rhs = 0.0;
  for (double ck : c) {
    if (ck < 0.0) throw ContractError("adagrad_oracle: c must be nonnegative");
    s += ck;
    rhs += ck / std::sqrt(s);
    if (std::sqrt(s) > rhs + kSlack) return false;
  }
  return true;
}

bool perspective_convexity_probe(RandomSource& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const double x1 = 3.0 * (2.0 * rng.uniform() - 1.0);
    const double x2 = 3.0 * (2.0 * rng.uniform() - 1.0);
    const double y1 = 0.1 + 3.0 * rng.uniform();
    const double y2 = 0.1 + 3.0 * rng.uniform();
    const double mid = phi(0.5 * (x1 + x2), 0.5 * (y1 + y2));
    const double avg = 0.5 * (phi(x1, y1) + phi(x2, y2));
    if (mid > avg + kSlack) return false;
  }
  return true;
}

double bregman(const StochasticOracle& problem, const Vec& x, const Vec& y) {
  if (x.size() != problem.dim() || y.size() != problem.dim()) throw ContractError("bregman: dimension mismatch");
  return problem.full_loss(x) - problem.full_loss(y) - problem.full_grad(y).dot(x - y);
}

}  // namespace spslab
