#include <algorithm>
#include <cmath>
#include <ostream>

#include "spslab/analysis.hpp"

namespace spslab {

CheckReport check_monotone(const std::vector<double>& series, double rel_tol, std::string name) {
  if (series.empty()) throw ContractError("check_monotone: empty series");
  CheckReport r;
  r.name = std::move(name);
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    const double allowed = series[t] * (1.0 + rel_tol) + rel_tol;
    const double ratio = series[t + 1] / allowed;
    if (ratio > r.worst_ratio || std::isnan(ratio)) {
      r.worst_ratio = ratio;
      r.details = {CheckRow{static_cast<double>(t + 1), series[t + 1], allowed, ratio, false}};
    }
    if (!(series[t + 1] <= allowed)) r.passed = false;
  }
  return r;
}

CheckReport check_rate(const std::vector<std::pair<double, double>>& mean_gap, const RateCertificate& cert,
                       double slack, std::string name) {
  CheckReport r;
  r.name = std::move(name);
  int covered = 0;
  int skipped = 0;
  for (const auto& [t, emp] : mean_gap) {
    CheckRow row{t, emp, 0.0, 0.0, false};
    if (!cert.covers(t)) {
      row.skipped = true;
      ++skipped;
      r.details.push_back(row);
      continue;
    }
    ++covered;
    row.bound = cert.bound(t);
    if (emp <= 0.0) {
      row.ratio = 0.0;
    } else if (row.bound > 0.0) {
      row.ratio = emp / row.bound;
    } else {
      row.ratio = INFINITY;
    }
    r.worst_ratio = std::max(r.worst_ratio, row.ratio);
    if (std::isnan(emp)) r.worst_ratio = NAN;
    r.details.push_back(row);
  }
  r.passed = covered > 0 && r.worst_ratio <= 1.0 + slack;
  if (skipped > 0) r.note = std::to_string(skipped) + " checkpoint(s) below the certificate threshold skipped";
  if (covered == 0) r.note = "no checkpoint past the certificate threshold";
  return r;
}

CheckReport ratio_report(std::string name, double worst_ratio, double limit, std::string note) {
  CheckReport r;
  r.name = std::move(name);
  r.worst_ratio = worst_ratio;
  r.passed = worst_ratio <= limit;
  r.note = std::move(note);
  return r;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ContractError("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, v] : points) {
    if (!(t > 0.0) || !(v > 0.0)) throw ContractError("loglog_slope: values must be positive");
    const double x = std::log(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ContractError("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

void write_report_text(std::ostream& out, const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " worst_ratio=" << format_real(r.worst_ratio);
    if (!r.note.empty()) out << " (" << r.note << ')';
    out << '\n';
    for (const auto& row : r.details) {
      out << "  t=" << format_real(row.t);
      if (row.skipped) {
        out << " skipped\n";
        continue;
      }
      out << " empirical=" << format_real(row.empirical) << " bound=" << format_real(row.bound)
          << " ratio=" << format_real(row.ratio) << '\n';
    }
  }
}

void write_report_csv(std::ostream& out, const std::vector<CheckReport>& reports) {
  out << "name,passed,worst_ratio\n";
  for (const auto& r : reports) out << r.name << ',' << (r.passed ? 1 : 0) << ',' << format_real(r.worst_ratio) << '\n';
}

}  // namespace spslab
