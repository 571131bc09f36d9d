#pragma once

// Rate certificates, the psi machinery, lemma oracles and trajectory
// checkers.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spslab/core.hpp"

namespace spslab {

/// psi(r) = r^2 / (A r + B), psi(0) = 0.
double psi(double r, double A, double B);
/// 0.5 (s A + sqrt(s^2 A^2 + 4 s B))
double psi_inv(double s, double A, double B);

// ---------------------------------------------------------------------------
// Certificates

enum class CertificateKind { NonsmoothAvg, SmoothAvg, SmoothAvgSigma, IamNonsmoothLast, IamSmoothLast, StrongConvexDist };

std::string to_string(CertificateKind k);

struct RateCertificate {
  CertificateKind kind = CertificateKind::NonsmoothAvg;
  ProblemConstants constants;
  /// Smallest t at which bound(t) is claimed.
  double threshold = 1.0;
  /// Denominator shift T0 (StrongConvexDist only).
  double shift = 0.0;
  double A = 0.0;
  double B = 0.0;

  double bound(double t) const;
  bool covers(double t) const { return t >= threshold; }
};

/// Throws ConfigError naming the first missing constant.
RateCertificate certificate(CertificateKind kind, const ProblemConstants& constants);

// ---------------------------------------------------------------------------
// Checks

struct CheckRow {
  double t = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool skipped = false;
};

struct CheckReport {
  std::string name;
  bool passed = true;
  double worst_ratio = 0.0;
  std::vector<CheckRow> details;
  std::string note;
};

/// Passes iff series[t+1] <= series[t] (1 + rel_tol) + rel_tol for every t.
/// worst_ratio is the largest series[t+1] / (series[t] (1 + rel_tol) + rel_tol).
CheckReport check_monotone(const std::vector<double>& series, double rel_tol, std::string name = "monotone");

/// Compares (t, empirical) pairs against cert.bound(t). Checkpoints the
/// certificate does not cover are kept as skipped rows; a report with no
/// covered checkpoint fails.
CheckReport check_rate(const std::vector<std::pair<double, double>>& mean_gap, const RateCertificate& cert,
                       double slack, std::string name = "rate");

/// Generic ratio check: passes iff worst_ratio <= limit.
CheckReport ratio_report(std::string name, double worst_ratio, double limit, std::string note = {});

// ---------------------------------------------------------------------------
// Lemma oracles

/// sum (a_t)_+^2 / b_t >= (sum a_t)_+^2 / sum b_t, with 1e-12 slack.
bool titu_oracle(const std::vector<double>& a, const std::vector<double>& b);
/// sqrt(S_t) <= sum_k c_k / sqrt(S_k) for every prefix, S_k = c_0 + ... + c_k.
bool adagrad_oracle(const std::vector<double>& c);
/// Midpoint convexity of (x)_+^2 / y on y > 0 at random probes.
bool perspective_convexity_probe(RandomSource& rng, int trials);

/// f(x) - f(y) - <grad f(y), x - y> on the full objective.
double bregman(const StochasticOracle& problem, const Vec& x, const Vec& y);

/// Least-squares slope of log(value) against log(t). Non-positive values are
/// rejected.
double loglog_slope(const std::vector<std::pair<double, double>>& points);

// ---------------------------------------------------------------------------
// Serialization

void write_report_text(std::ostream& out, const std::vector<CheckReport>& reports);
/// Columns name,passed,worst_ratio.
void write_report_csv(std::ostream& out, const std::vector<CheckReport>& reports);

}  // namespace spslab
