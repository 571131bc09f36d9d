#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "spslab/analysis.hpp"
#include "spslab/problems.hpp"

using namespace spslab;

namespace {

// Central differences of the batch loss, compared with the analytic gradient.
double fd_relative_error(const StochasticOracle& p, const BatchSample& b, const Vec& x) {
  const Vec g = p.eval(b, x).grad;
  Vec fd(x.size());
  const double h = 1e-6;
  for (Index k = 0; k < x.size(); ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    fd(k) = (p.eval(b, xp).loss - p.eval(b, xm).loss) / (2 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

void check_midpoint_convex(const StochasticOracle& p, std::uint64_t seed, int probes) {
  RandomSource r = make_rng(seed);
  for (int k = 0; k < probes; ++k) {
    const Vec x = r.normal_vector(p.dim()), y = r.normal_vector(p.dim());
    const double mid = p.full_loss(0.5 * (x + y));
    CHECK(mid <= 0.5 * (p.full_loss(x) + p.full_loss(y)) + 1e-12 * (1 + std::abs(mid)));
  }
}

}  // namespace

TEST_CASE("quadratic: Hessians are symmetric PSD with the 1/(3d) scaling") {
  const QuadraticFiniteSum p = gen_quadratic(8, 5, false, 0.1, 3);
  for (Index i = 0; i < p.size(); ++i) {
    const Mat& H = p.hessian(i);
    CHECK((H - H.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(p.component_smoothness(i) == doctest::Approx(2 * es.eigenvalues().maxCoeff()).epsilon(1e-12));
  }
  // Hand instance: one 2x1 factor [1; 1] gives H = 2/2 = 1.
  Mat A(2, 1);
  A << 1, 1;
  const QuadraticFiniteSum q = QuadraticFiniteSum::from_factors({A}, {Vec::Constant(1, 0.0)}, {0.0});
  CHECK(q.hessian(0)(0, 0) == 1.0);
}

TEST_CASE("quadratic: component loss is bounded below by its offset") {
  const QuadraticFiniteSum p = gen_quadratic(10, 4, false, 0.2, 5);
  RandomSource r = make_rng(8);
  for (int k = 0; k < 50; ++k) {
    const Vec x = r.normal_vector(4);
    for (Index i = 0; i < p.size(); ++i) CHECK(p.component_loss(i, x) >= p.offset(i));
  }
}

TEST_CASE("quadratic: interpolated instance shares one center") {
  const QuadraticFiniteSum p = gen_quadratic(25, 6, true, 0.1, 1);
  CHECK(p.interpolated());
  for (Index i = 1; i < p.size(); ++i) CHECK(p.center(i) == p.center(0));
  CHECK(p.solution()->x_star == p.center(0));
  double mean_offset = 0.0;
  for (Index i = 0; i < p.size(); ++i) mean_offset += p.offset(i);
  CHECK(p.solution()->f_star == doctest::Approx(mean_offset / 25).epsilon(1e-14));
  const ProblemConstants c = p.constants(Vec::Zero(6));
  CHECK(*c.delta_star == 0.0);
  CHECK(*c.sigma_star_sq == 0.0);
}

TEST_CASE("quadratic: nu = 0 gives every offset 0.5") {
  const QuadraticFiniteSum p = gen_quadratic(15, 3, false, 0.0, 2);
  for (Index i = 0; i < p.size(); ++i) CHECK(p.offset(i) == 0.5);
}

TEST_CASE("quadratic: generation is reproducible to the bit") {
  const QuadraticFiniteSum a = gen_quadratic(50, 10, false, 0.1, 17);
  const QuadraticFiniteSum b = gen_quadratic(50, 10, false, 0.1, 17);
  CHECK(a.solution()->f_star == b.solution()->f_star);
  CHECK(a.solution()->x_star == b.solution()->x_star);
  double direct = 0.0;
  for (Index i = 0; i < a.size(); ++i) direct += a.component_loss(i, a.solution()->x_star);
  CHECK(a.solution()->f_star == doctest::Approx(direct / 50).epsilon(1e-13));
  const QuadraticFiniteSum c = gen_quadratic(50, 10, false, 0.1, 18);
  CHECK(c.solution()->f_star != a.solution()->f_star);
}

TEST_CASE("quadratic: solution has vanishing gradient") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const QuadraticFiniteSum p = gen_quadratic(100, 10, false, 0.1, seed);
    CHECK(p.full_grad(p.solution()->x_star).norm() <= 1e-8);
  }
}

TEST_CASE("quadratic: single component solution is its center") {
  const QuadraticFiniteSum src = gen_quadratic(1, 4, false, 0.1, 6);
  CHECK((src.solution()->x_star - src.center(0)).norm() <= 1e-12);
}

TEST_CASE("quadratic: singleton batch at its own center") {
  const QuadraticFiniteSum p = gen_quadratic(12, 3, false, 0.1, 9);
  for (Index i = 0; i < p.size(); ++i) {
    const Evaluation e = p.eval(BatchSample{{i}}, p.center(i));
    CHECK(e.loss == doctest::Approx(p.offset(i)).epsilon(1e-15));
    CHECK(e.grad.norm() == 0.0);
  }
}

TEST_CASE("quadratic: rank deficient mean Hessian is rejected") {
  Mat A = Mat::Zero(1, 2);
  A(0, 0) = 1.0;
  const QuadraticFiniteSum p = QuadraticFiniteSum::from_factors({A}, {Vec::Zero(2)}, {0.0});
  CHECK_FALSE(p.has_solution());
  CHECK_THROWS_AS(quad_solution(p), DegenerateProblemError);
}

TEST_CASE("quadratic: sigma_star_sq <= 2 L delta_star") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QuadraticFiniteSum p = gen_quadratic(40, 6, false, 0.1, seed);
    const ProblemConstants c = p.constants(Vec::Zero(6));
    CHECK(*c.delta_star > 0.0);
    CHECK(*c.sigma_star_sq <= 2 * *c.L * *c.delta_star);
    CHECK(*c.L == doctest::Approx(p.max_smoothness()));
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("quadratic: delta_star and sigma_star_sq match brute force") {
  const QuadraticFiniteSum p = gen_quadratic(30, 5, false, 0.1, 4);
  const Vec& xs = p.solution()->x_star;
  double delta = 0.0, sigma = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    delta += p.component_loss(i, xs) - p.offset(i);
    Vec g = Vec::Zero(5);
    p.add_component_grad(i, xs, 1.0, g);
    sigma += g.squaredNorm();
  }
  const ProblemConstants c = p.constants(Vec::Zero(5));
  CHECK(*c.delta_star == doctest::Approx(delta / 30).epsilon(1e-10));
  CHECK(*c.sigma_star_sq == doctest::Approx(sigma / 30).epsilon(1e-10));
  CHECK(c.D == doctest::Approx(xs.norm()));
  Eigen::SelfAdjointEigenSolver<Mat> es(p.mean_hessian());
  CHECK(*c.mu == doctest::Approx(2 * es.eigenvalues().minCoeff()).epsilon(1e-10));
}

TEST_CASE("quadratic: suboptimality is the factored form of f - f*") {
  const QuadraticFiniteSum p = gen_quadratic(20, 4, false, 0.1, 7);
  RandomSource r = make_rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vec x = p.solution()->x_star + r.normal_vector(4);
    const double naive = p.full_loss(x) - p.solution()->f_star;
    CHECK(p.suboptimality(x) == doctest::Approx(naive).epsilon(1e-9));
    CHECK(p.suboptimality(x) >= 0.0);
  }
  CHECK(p.suboptimality(p.solution()->x_star) == 0.0);
}

TEST_CASE("finite differences match analytic gradients") {
  RandomSource r = make_rng(12);
  std::vector<std::unique_ptr<StochasticOracle>> probs;
  probs.push_back(std::make_unique<QuadraticFiniteSum>(gen_quadratic(20, 5, false, 0.1, 1)));
  probs.push_back(std::make_unique<PoissonRegression>(gen_poisson(60, 4, 0.5, 2)));
  probs.push_back(std::make_unique<DistillationTask>(gen_distillation(40, 6, 4, 0.3, 3)));
  probs.push_back(std::make_unique<AbsoluteLossRegression>(gen_absolute(30, 5, false, 0.5, false, 4)));
  for (const auto& p : probs) {
    CAPTURE(p->name());
    for (int k = 0; k < 5; ++k) {
      const BatchSample b = sample_batch(r, p->size(), 4);
      const Vec x = 0.5 * r.normal_vector(p->dim());
      CHECK(fd_relative_error(*p, b, x) <= 1e-5);
    }
  }
}

TEST_CASE("convexity probes on every problem class") {
  check_midpoint_convex(gen_quadratic(20, 5, false, 0.1, 1), 1, 200);
  check_midpoint_convex(gen_absolute(30, 5, false, 0.5, false, 2), 2, 200);
  check_midpoint_convex(gen_poisson(40, 3, 0.5, 3), 3, 200);
  check_midpoint_convex(gen_distillation(40, 5, 3, 0.3, 4), 4, 200);
}

TEST_CASE("absolute: subgradient inequality and Lipschitz constant") {
  const AbsoluteLossRegression p = gen_absolute(25, 4, true, 0.0, false, 6);
  RandomSource r = make_rng(2);
  for (int k = 0; k < 200; ++k) {
    const Index i = static_cast<Index>(r.uniform_index(25));
    const Vec x = r.normal_vector(4), y = r.normal_vector(4);
    Vec g = Vec::Zero(4);
    p.add_component_grad(i, x, 1.0, g);
    CHECK(p.component_loss(i, y) >= p.component_loss(i, x) + g.dot(y - x) - 1e-12);
    CHECK(std::abs(p.component_loss(i, x) - p.component_loss(i, y)) <= p.feature(i).norm() * (x - y).norm() + 1e-12);
  }
}

TEST_CASE("absolute: interpolating instance fits every row") {
  const AbsoluteLossRegression p = gen_absolute(30, 5, true, 0.0, false, 1);
  REQUIRE(p.interpolating());
  const Vec& xs = p.solution()->x_star;
  for (Index i = 0; i < p.size(); ++i) CHECK(std::abs(p.feature(i).dot(xs) - p.target(i)) <= 1e-12);
  CHECK(p.solution()->f_star <= 1e-12);
  const ProblemConstants c = p.constants(Vec::Zero(5));
  double g2 = 0.0;
  for (Index i = 0; i < p.size(); ++i) g2 += p.feature(i).squaredNorm();
  CHECK(*c.G_sq == doctest::Approx(g2 / 30));
  CHECK(c.D == doctest::Approx(xs.norm()));
}

TEST_CASE("absolute: unit rows give G^2 = 1") {
  const AbsoluteLossRegression p = gen_absolute(20, 6, true, 0.0, true, 3);
  CHECK(*p.constants(Vec::Zero(6)).G_sq == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("absolute: subgradient is zero on the kink") {
  const AbsoluteLossRegression p = gen_absolute(5, 3, true, 0.0, false, 2);
  Vec g = Vec::Zero(3);
  p.add_component_grad(0, p.solution()->x_star, 1.0, g);
  CHECK(g.norm() == 0.0);
}

TEST_CASE("poisson: closed form at the origin") {
  Vec a(2), b(2);
  a << 1.0, 2.0;
  b << -1.0, 0.5;
  PoissonRegression p({a, b}, {3.0, 0.0});
  const Evaluation e = p.eval(BatchSample{{0, 1}}, Vec::Zero(2));
  CHECK(e.loss == 1.0);
  const Vec expected = 0.5 * (a * (1 - 3.0) + b * (1 - 0.0));
  CHECK((e.grad - expected).norm() <= 1e-15);
}

TEST_CASE("poisson: Newton solve reaches a stationary point") {
  const PoissonRegression p = gen_poisson(200, 5, 0.5, 1);
  REQUIRE(p.has_solution());
  CHECK(p.full_grad(p.solution()->x_star).norm() <= 1e-9);
  RandomSource r = make_rng(4);
  for (int k = 0; k < 20; ++k) CHECK(p.full_loss(p.solution()->x_star + 0.1 * r.normal_vector(5)) >= p.solution()->f_star);
  const ProblemConstants c = p.constants(Vec::Zero(5));
  CHECK(c.empirical);
  CHECK(*c.L > 0.0);
}

TEST_CASE("poisson: loads a count-first CSV") {
  const std::string path = "poisson_test_rows.csv";
  {
    std::ofstream f(path);
    f << "y,x1,x2\n2,0.5,0.1\n0,-0.3,0.2\n1,0.1,-0.4\n4,0.6,0.3\n";
  }
  const PoissonRegression p = load_poisson_csv(path);
  CHECK(p.size() == 4);
  CHECK(p.dim() == 2);
  CHECK(p.count(3) == 4.0);
  CHECK(p.row(1)(0) == -0.3);
  std::remove(path.c_str());
}

TEST_CASE("distillation: realizable noiseless task") {
  const DistillationTask p = gen_distillation(60, 4, 4, 0.0, 5);
  CHECK(p.mean_teacher_loss() <= 1e-12);
  CHECK(std::abs(p.mean_teacher_loss() - p.solution()->f_star) <= 1e-12);
}

TEST_CASE("distillation: teacher never worse than the student optimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DistillationTask p = gen_distillation(100, 8, 5, 0.5, seed);
    CHECK(p.mean_teacher_loss() <= p.solution()->f_star + 1e-10);
    // Student optimum from normal equations; the loss is quadratic so
    // gradient differences give the Hessian exactly.
    const Vec g0 = p.full_grad(Vec::Zero(5));
    Mat H(5, 5);
    for (Index k = 0; k < 5; ++k) H.col(k) = p.full_grad(Vec::Unit(5, k)) - g0;
    const Vec xs = H.ldlt().solve(-g0);
    CHECK(p.solution()->f_star == doctest::Approx(p.full_loss(xs)).epsilon(1e-10));
    CHECK(p.full_grad(p.solution()->x_star).norm() <= 1e-9);
  }
}

TEST_CASE("distillation: teacher weights are reproducible") {
  const DistillationTask a = gen_distillation(50, 6, 3, 0.2, 11), b = gen_distillation(50, 6, 3, 0.2, 11);
  CHECK(a.teacher_weights() == b.teacher_weights());
  RandomSource r = make_rng(0);
  const BatchSample batch = sample_batch(r, 50, 4);
  double manual = 0.0;
  for (Index i : batch.indices) manual += a.teacher_component_loss(i);
  CHECK(*a.teacher_loss(batch) == doctest::Approx(manual / 4).epsilon(1e-15));
  CHECK(a.opt_loss(batch, OptLossMode::teacher()) == *a.teacher_loss(batch));
}

TEST_CASE("distillation: student wider than teacher is rejected") {
  CHECK_THROWS_AS(gen_distillation(20, 3, 4, 0.1, 0), ContractError);
}
