#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "spslab/core.hpp"
#include "spslab/problems.hpp"

using namespace spslab;

TEST_CASE("rng: seed 0 first draws are frozen") {
  // Golden values.
  CHECK(make_rng(0).next_u64() == 5199774590669546748ULL);
  RandomSource r = make_rng(0);
  CHECK(r.uniform() == 0.28188034538194229);
}

TEST_CASE("rng: same seed and label give the same stream") {
  RandomSource a = make_rng(42).split("sampler");
  RandomSource b = make_rng(42).split("sampler");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: split labels give different streams") {
  RandomSource p = make_rng(3).split("problem");
  RandomSource s = make_rng(3).split("sampler");
  CHECK(p.key() != s.key());
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += p.next_u64() == s.next_u64() ? 1 : 0;
  CHECK(equal == 0);
  // Correlation between the two uniform streams stays near zero.
  RandomSource p2 = make_rng(3).split("problem"), s2 = make_rng(3).split("sampler");
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = p2.uniform(), y = s2.uniform();
    sxy += x * y; sx += x; sy += y; sxx += x * x; syy += y * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("rng: uniform mean over 1e5 draws") {
  RandomSource r = make_rng(11);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  CHECK(std::abs(s / 1e5 - 0.5) < 0.01);
}

TEST_CASE("rng: normal and poisson moments") {
  RandomSource r = make_rng(5);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  for (double mean : {0.3, 4.0, 60.0}) {
    double m = 0;
    for (int i = 0; i < 20000; ++i) m += static_cast<double>(r.poisson(mean));
    m /= 20000;
    CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / 20000));
  }
}

TEST_CASE("sample_batch: n = 1 always yields index 0") {
  RandomSource r = make_rng(9);
  const BatchSample b = sample_batch(r, 1, 1);
  REQUIRE(b.batch_size() == 1);
  CHECK(b.indices[0] == 0);
}

TEST_CASE("sample_batch: fixed seed is reproducible") {
  RandomSource a = make_rng(7).split("sampler");
  RandomSource b = make_rng(7).split("sampler");
  const BatchSample x = sample_batch(a, 4, 2), y = sample_batch(b, 4, 2);
  CHECK(x.indices == y.indices);
  CHECK(x.indices == std::vector<Index>{0, 1});
}

TEST_CASE("sample_batch: frequencies within 3 sigma of uniform") {
  RandomSource r = make_rng(1);
  const int draws = 100000;
  std::vector<int> counts(10, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sample_batch(r, 10, 1).indices[0])];
  const double p = 0.1, sd = std::sqrt(draws * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - draws * p) <= 3 * sd);
}

TEST_CASE("sample_batch: rejects bad sizes") {
  RandomSource r = make_rng(0);
  CHECK_THROWS_AS(sample_batch(r, 0, 1), ContractError);
  CHECK_THROWS_AS(sample_batch(r, 5, 0), ContractError);
}

TEST_CASE("opt_loss modes on a quadratic") {
  const QuadraticFiniteSum p = gen_quadratic(30, 4, false, 0.1, 2);
  RandomSource r = make_rng(0);
  const BatchSample b = sample_batch(r, p.size(), 5);
  CHECK(p.opt_loss(b, OptLossMode::zero()) == 0.0);
  CHECK(p.opt_loss(b, OptLossMode::custom(1.25)) == 1.25);
  CHECK(p.opt_loss(b, OptLossMode::averaged()) == doctest::Approx(p.solution()->f_star).epsilon(1e-14));
  double brute = 0.0;
  for (Index i : b.indices) brute += p.component_loss(i, p.solution()->x_star);
  brute /= static_cast<double>(b.indices.size());
  CHECK(std::abs(p.opt_loss(b, OptLossMode::theoretical()) - brute) <= 1e-12);
  CHECK_THROWS_AS(p.opt_loss(b, OptLossMode::teacher()), ConfigError);
}

TEST_CASE("opt_loss: nu = 0 interpolated quadratic gives 0.5 per batch") {
  const QuadraticFiniteSum p = gen_quadratic(20, 3, true, 0.0, 4);
  RandomSource r = make_rng(1);
  for (int k = 0; k < 10; ++k) {
    const BatchSample b = sample_batch(r, p.size(), 3);
    CHECK(p.opt_loss(b, OptLossMode::theoretical()) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("ProblemConstants::validate") {
  ProblemConstants c;
  c.D = 1.0;
  c.L = 2.0;
  c.delta_star = 0.5;
  c.sigma_star_sq = 2.0;
  CHECK_NOTHROW(c.validate());
  c.sigma_star_sq = 2.1;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.sigma_star_sq = 1.0;
  c.delta_star = -0.1;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.delta_star = 0.5;
  c.D = -1.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("RunningAverage is the Cesaro mean") {
  RunningAverage avg;
  Vec a(2), b(2), c(2);
  a << 1, 2;
  b << 3, 4;
  c << -1, 0;
  avg.push(a);
  avg.push(b);
  avg.push(c);
  CHECK(avg.count() == 3);
  CHECK(avg.mean()(0) == doctest::Approx(1.0));
  CHECK(avg.mean()(1) == doctest::Approx(2.0));
}

TEST_CASE("format_real: 17 significant digits and non-finite spellings") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("trajectory CSV: header, newline and round trip") {
  RunRecord r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rows.push_back({0, 1.5, 1.25, 0.5, nan, 1.5});
  r.rows.push_back({1, 0.1, nan, nan, nan, 0.75});
  std::ostringstream out;
  write_trajectory_csv(out, r);
  const std::string text = out.str();
  CHECK(text ==
        "t,loss_full,loss_batch,stepsize,dist_to_opt,cesaro_loss\n"
        "0,1.5,1.25,0.5,nan,1.5\n"
        "1,0.10000000000000001,nan,nan,nan,0.75\n");
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream in(text);
  const RunRecord back = read_trajectory_csv(in);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1].loss_full == 0.1);
  CHECK(std::isnan(back.rows[1].stepsize));
  std::ostringstream again;
  write_trajectory_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("trajectory CSV: rejects a wrong header") {
  std::istringstream in("t,loss\n0,1\n");
  CHECK_THROWS(read_trajectory_csv(in));
}

TEST_CASE("digest_hex is FNV-1a 64") {
  // Reference values of the 64-bit FNV-1a hash.
  CHECK(digest_hex("") == "cbf29ce484222325");
  CHECK(digest_hex("a") == "af63dc4c8601ec8c");
}
