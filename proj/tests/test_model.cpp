#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mpet/bench.hpp"
#include "mpet/model.hpp"

using namespace mpet;

namespace {

PhysicalParams two_network(double a1, double a2, double b12, double tau = 1.0) {
  PhysicalParams p;
  p.n = 2;
  p.lambda = 1.0;
  p.mu = 1.0;
  p.tau = tau;
  p.c_p = Vector::Zero(2);
  p.alpha = Vector(2);
  p.alpha << a1, a2;
  p.beta = Matrix::Zero(2, 2);
  p.beta(0, 1) = p.beta(1, 0) = b12;
  p.K = Vector::Ones(2);
  return p;
}

} // namespace

TEST_CASE("rescaled coefficients of the two-network benchmark") {
  const PhysicalParams p = barenblatt_params(UnitMode::Si);
  const RescaledModel m = rescale(p, LMode::Paper, 0.0, 10.0);
  // Hand evaluation of alpha_1^2 / (tau K_1) with the printed base values.
  const double expected = 0.95 * 0.95 / 6.18e-15;
  CHECK(m.Rinv[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(m.Rinv[0] == doctest::Approx(1.4604e14).epsilon(1e-4));
  CHECK(m.alpha_p[0] == doctest::Approx(54e-9 / (0.95 * 0.95)).epsilon(1e-12));
  CHECK(m.L == doctest::Approx(1.0 / (1.0 + 4.2e6)).epsilon(1e-12));
  CHECK(m.lambda0 == 4.2e6);
}

TEST_CASE("single network has no transfer") {
  PhysicalParams p;
  p.n = 1;
  p.lambda = 2.5;
  p.mu = 1.0;
  p.tau = 1.0;
  p.c_p = Vector::Constant(1, 0.1);
  p.alpha = Vector::Ones(1);
  p.beta = Matrix::Zero(1, 1);
  p.K = Vector::Ones(1);
  const RescaledModel m = rescale(p, LMode::Paper, 0.0, 10.0);
  CHECK(m.Lambda1(0, 0) == 0.0);
  CHECK(m.LambdaL(0, 0) == doctest::Approx(1.0 / 3.5));
}

TEST_CASE("symmetric two-network transfer matrix") {
  const double b = 0.7;
  const RescaledModel m = rescale(two_network(1.0, 1.0, b), LMode::Paper, 0.0, 10.0);
  CHECK(m.Lambda1(0, 0) == doctest::Approx(b));
  CHECK(m.Lambda1(0, 1) == doctest::Approx(-b));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.Lambda1);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(es.eigenvalues()[1] == doctest::Approx(2.0 * b).epsilon(1e-14));
}

TEST_CASE("quadratic forms") {
  const RescaledModel m =
      rescale(barenblatt_params(UnitMode::PaperRaw), LMode::Paper, 0.0, 10.0);
  SUBCASE("zero vector gives zero for every matrix") {
    const Vector x = Vector::Zero(2);
    for (LambdaId id : {LambdaId::L1, LambdaId::L2, LambdaId::L3, LambdaId::L4,
                        LambdaId::Sum, LambdaId::LL, LambdaId::Tilde,
                        LambdaId::E})
      CHECK(lambda_quadratic_form(m, id, x) == 0.0);
  }
  SUBCASE("all-ones vector against the rank-one Lambda4") {
    const Vector x = Vector::Ones(2);
    CHECK(lambda_quadratic_form(m, LambdaId::L4, x) ==
          doctest::Approx(4.0 / m.lambda0).epsilon(1e-14));
  }
  SUBCASE("Lambda1 matches the pairwise closed form on random vectors") {
    const PhysicalParams p = barenblatt_params(UnitMode::PaperRaw);
    std::mt19937 rng(42);
    std::normal_distribution<double> dist;
    for (int t = 0; t < 200; ++t) {
      Vector x(2);
      x << dist(rng), dist(rng);
      const double form = lambda_quadratic_form(m, LambdaId::L1, x);
      double closed = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = i + 1; j < 2; ++j) {
          const double diff = x[i] / p.alpha[i] - x[j] / p.alpha[j];
          closed += p.tau * p.beta(i, j) * diff * diff;
        }
      CHECK(form == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("four-network closed-form identity for Lambda1") {
  const PhysicalParams p = mpet4_params(UnitMode::Si);
  const RescaledModel m = rescale(p, LMode::Paper, 0.0, 10.0);
  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  for (int t = 0; t < 200; ++t) {
    Vector x(4);
    for (int i = 0; i < 4; ++i)
      x[i] = dist(rng);
    double closed = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const double diff = x[i] / p.alpha[i] - x[j] / p.alpha[j];
        closed += p.tau * p.beta(i, j) * diff * diff;
      }
    const double form = lambda_quadratic_form(m, LambdaId::L1, x);
    CHECK(form == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("matrix classes: SPSD parts and SPD sums") {
  for (UnitMode units : {UnitMode::Si, UnitMode::PaperRaw}) {
    const RescaledModel m =
        rescale(barenblatt_params(units), LMode::Paper, 0.0, 10.0);
    auto min_eig = [](const Matrix &M) {
      return Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues().minCoeff();
    };
    const double scale = m.Lambda.norm();
    CHECK(min_eig(m.Lambda1) > -1e-14 * scale);
    CHECK(min_eig(m.Lambda2) >= 0.0);
    CHECK(min_eig(m.Lambda4) > -1e-14 * scale);
    CHECK(min_eig(m.Lambda3) > 0.0);
    CHECK(min_eig(m.Lambda) > 0.0);
    CHECK(min_eig(m.LambdaTilde) > 0.0);
    CHECK(min_eig(m.LambdaE) > 0.0);
  }
}

TEST_CASE("rescale is scale-consistent in tau") {
  const RescaledModel m1 =
      rescale(two_network(0.9, 0.4, 0.3, 1.0), LMode::Paper, 0.0, 10.0);
  const RescaledModel m2 =
      rescale(two_network(0.9, 0.4, 0.3, 2.0), LMode::Paper, 0.0, 10.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(m2.Rinv[i] == doctest::Approx(0.5 * m1.Rinv[i]).epsilon(1e-14));
    for (int j = 0; j < 2; ++j)
      CHECK(m2.alpha_c(i, j) ==
            doctest::Approx(2.0 * m1.alpha_c(i, j)).epsilon(1e-14));
  }
}

TEST_CASE("L modes") {
  const PhysicalParams p = two_network(1.0, 1.0, 0.0);
  CHECK(rescale(p, LMode::Paper, 0.0, 10.0).L == doctest::Approx(0.5));
  CHECK(rescale(p, LMode::Theory, 0.25, 10.0).L ==
        doctest::Approx(1.0 / 1.25));
  CHECK(rescale(p, LMode::Explicit, 0.125, 10.0).L == doctest::Approx(0.125));
  CHECK_THROWS(rescale(p, LMode::Theory, -1.0, 10.0));
}

TEST_CASE("parameter range violations are rejected") {
  PhysicalParams p = two_network(0.9, 0.4, 0.3);
  SUBCASE("negative lambda") {
    p.lambda = -1.0;
    CHECK_THROWS_AS(rescale(p, LMode::Paper, 0.0, 10.0),
                    std::invalid_argument);
  }
  SUBCASE("zero conductivity") {
    p.K[1] = 0.0;
    CHECK_THROWS_AS(rescale(p, LMode::Paper, 0.0, 10.0),
                    std::invalid_argument);
  }
  SUBCASE("asymmetric beta") {
    p.beta(0, 1) = 0.5;
    CHECK_THROWS_AS(rescale(p, LMode::Paper, 0.0, 10.0),
                    std::invalid_argument);
  }
  SUBCASE("negative storage") {
    p.c_p[0] = -1e-3;
    CHECK_THROWS_AS(rescale(p, LMode::Paper, 0.0, 10.0),
                    std::invalid_argument);
  }
  SUBCASE("nonzero beta diagonal") {
    p.beta(0, 0) = 0.1;
    CHECK_THROWS_AS(rescale(p, LMode::Paper, 0.0, 10.0),
                    std::invalid_argument);
  }
}
