#pragma once

// Shared numeric types, deterministic randomness, the stochastic-oracle
// interface and run bookkeeping.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a caller violates an operation's precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for inconsistent or incomplete configuration (missing constants,
/// an opt-loss mode the problem cannot serve, unknown config keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterate, loss or gradient becomes NaN/Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool all_finite(const Vec& v);

// ---------------------------------------------------------------------------
// Randomness

/// Counter-based random source. Every draw is a pure function of
/// (key, counter), so a stream depends only on its seed and the labels used
/// to split it, never on thread scheduling.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t key) : key_(key) {}

  /// Independent child stream identified by a label.
  RandomSource split(std::string_view label) const;
  RandomSource split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in {0, ..., n-1}, unbiased. n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller (one pair of uniforms per draw).
  double normal();
  Vec normal_vector(Index n);
  /// Poisson-distributed count with the given mean.
  std::uint64_t poisson(double mean);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RandomSource make_rng(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sampling

/// One realized mini-batch: component indices drawn i.i.d. uniformly with
/// replacement.
struct BatchSample {
  std::vector<Index> indices;
  Index batch_size() const { return static_cast<Index>(indices.size()); }
};

BatchSample sample_batch(RandomSource& rng, Index n, Index batch_size);

// ---------------------------------------------------------------------------
// Opt-loss estimation

enum class OptLossKind { Theoretical, Averaged, Zero, Teacher, Custom };

/// How the per-batch optimal loss f_xi(x*) is supplied to Polyak-type steps.
struct OptLossMode {
  OptLossKind kind = OptLossKind::Theoretical;
  double custom_value = 0.0;  // used only by Custom

  static OptLossMode theoretical() { return {OptLossKind::Theoretical, 0.0}; }
  static OptLossMode averaged() { return {OptLossKind::Averaged, 0.0}; }
  static OptLossMode zero() { return {OptLossKind::Zero, 0.0}; }
  static OptLossMode teacher() { return {OptLossKind::Teacher, 0.0}; }
  static OptLossMode custom(double v) { return {OptLossKind::Custom, v}; }

  bool operator==(const OptLossMode&) const = default;
};

std::string to_string(OptLossKind kind);
OptLossKind opt_loss_kind_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Problem constants

struct ProblemConstants {
  double D = 0.0;  // ||x0 - x*||
  std::optional<double> G_sq;
  std::optional<double> L;
  std::optional<double> mu;
  std::optional<double> delta_star;
  std::optional<double> sigma_star_sq;
  std::optional<Vec> x_star;
  std::optional<double> f_star;
  /// Set when L / G_sq were estimated by sampling instead of computed.
  bool empirical = false;

  /// Throws ContractError when a stored constant breaks its invariant.
  void validate(double rel_tol = 1e-9) const;
};

// ---------------------------------------------------------------------------
// Oracle interface

struct Evaluation {
  double loss = 0.0;
  Vec grad;
};

struct Solution {
  Vec x_star;
  double f_star = 0.0;
};

/// A sampleable finite sum f = (1/n) sum_i f_i with analytic (sub)gradients.
/// Implementations are immutable after construction.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual Index size() const = 0;

  virtual double component_loss(Index i, const Vec& x) const = 0;
  /// grad += weight * g_i(x)
  virtual void add_component_grad(Index i, const Vec& x, double weight, Vec& grad) const = 0;

  /// Batch mean of component losses and (sub)gradients.
  virtual Evaluation eval(const BatchSample& batch, const Vec& x) const;
  virtual double full_loss(const Vec& x) const;
  virtual Vec full_grad(const Vec& x) const;

  /// f(x) - f(x*). Overridden where a cancellation-free form exists.
  virtual double suboptimality(const Vec& x) const;

  const std::optional<Solution>& solution() const { return solution_; }
  bool has_solution() const { return solution_.has_value(); }

  double opt_loss(const BatchSample& batch, const OptLossMode& mode) const;

  /// f_xi(x) - opt_loss. `batch_loss` is f_xi(x) as returned by eval.
  virtual double excess_loss(const BatchSample& batch, const Vec& x, double batch_loss,
                             const OptLossMode& mode) const;

  /// Batch loss of a teacher oracle, if this problem has one.
  virtual std::optional<double> teacher_loss(const BatchSample& batch) const;

  virtual ProblemConstants constants(const Vec& x0) const = 0;

  /// Starting point used by the harness.
  virtual Vec initial_point() const { return Vec::Zero(dim()); }

 protected:
  /// Stores x*, evaluates f* and caches every f_i(x*).
  void set_solution(Vec x_star);
  /// Fills D, x_star and f_star from the stored solution.
  void fill_solution_constants(const Vec& x0, ProblemConstants& c) const;

  std::optional<Solution> solution_;
  std::vector<double> component_opt_;  // f_i(x*)
};

// ---------------------------------------------------------------------------
// Run bookkeeping

/// Online Cesaro average of the iterates pushed so far.
class RunningAverage {
 public:
  void push(const Vec& x);
  const Vec& mean() const { return mean_; }
  std::int64_t count() const { return count_; }

 private:
  Vec mean_;
  std::int64_t count_ = 0;
};

/// One CSV row. Row t describes iterate x_t and the step taken from it; the
/// final row has no step, so its batch loss and step size are NaN.
struct TrajectoryRow {
  std::int64_t t = 0;
  double loss_full = 0.0;
  double loss_batch = 0.0;
  double stepsize = 0.0;
  double dist_to_opt = 0.0;
  double cesaro_loss = 0.0;
};

/// In-memory quantities that are not part of the CSV contract.
struct RowDiagnostics {
  double gap = 0.0;           // f(x_t) - f*
  double cesaro_gap = 0.0;    // f(xbar_t) - f*
  double anchor_dist = 0.0;   // ||z_t - x*|| for averaging methods (z_{t-1} at row t)
};

struct RunRecord {
  std::vector<TrajectoryRow> rows;
  std::vector<RowDiagnostics> diagnostics;
  std::uint64_t seed = 0;
  std::string config_digest;
  bool failed = false;
  std::string failure;

  bool operator==(const RunRecord& other) const;
};

inline constexpr std::string_view kTrajectoryHeader =
    "t,loss_full,loss_batch,stepsize,dist_to_opt,cesaro_loss";

/// %.17g formatting; non-finite values are written as nan / inf / -inf.
std::string format_real(double v);
void write_trajectory_csv(std::ostream& out, const RunRecord& record);
RunRecord read_trajectory_csv(std::istream& in);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string digest_hex(std::string_view text);

}  // namespace spslab
