#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "spslab/core.hpp"

namespace spslab {

void RunningAverage::push(const Vec& x) {
  if (count_ == 0) {
    mean_ = x;
  } else {
    mean_ += (x - mean_) / static_cast<double>(count_ + 1);
  }
  ++count_;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_row(const TrajectoryRow& a, const TrajectoryRow& b) {
  return a.t == b.t && same_bits(a.loss_full, b.loss_full) && same_bits(a.loss_batch, b.loss_batch) &&
         same_bits(a.stepsize, b.stepsize) && same_bits(a.dist_to_opt, b.dist_to_opt) &&
         same_bits(a.cesaro_loss, b.cesaro_loss);
}

double parse_real(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw ConfigError("trajectory csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

bool RunRecord::operator==(const RunRecord& other) const {
  if (seed != other.seed || rows.size() != other.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!same_row(rows[i], other.rows[i])) return false;
  return true;
}

void write_trajectory_csv(std::ostream& out, const RunRecord& record) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : record.rows) {
    out << r.t << ',' << format_real(r.loss_full) << ',' << format_real(r.loss_batch) << ','
        << format_real(r.stepsize) << ',' << format_real(r.dist_to_opt) << ',' << format_real(r.cesaro_loss)
        << '\n';
  }
}

RunRecord read_trajectory_csv(std::istream& in) {
  RunRecord rec;
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader)
    throw ConfigError("trajectory csv: missing or wrong header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw ConfigError("trajectory csv line " + std::to_string(lineno) + ": expected 6 columns");
    TrajectoryRow r;
    r.t = static_cast<std::int64_t>(parse_real(cells[0], lineno));
    r.loss_full = parse_real(cells[1], lineno);
    r.loss_batch = parse_real(cells[2], lineno);
    r.stepsize = parse_real(cells[3], lineno);
    r.dist_to_opt = parse_real(cells[4], lineno);
    r.cesaro_loss = parse_real(cells[5], lineno);
    if (r.t != static_cast<std::int64_t>(rec.rows.size()))
      throw ConfigError("trajectory csv line " + std::to_string(lineno) + ": rows not contiguous from t = 0");
    rec.rows.push_back(r);
  }
  return rec;
}

std::string digest_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spslab
