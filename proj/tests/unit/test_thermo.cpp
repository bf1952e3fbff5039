#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "shockgp/errors.hpp"
#include "shockgp/thermo.hpp"
#include "test_support.hpp"

using namespace shockgp;
using shockgp::testing::Rng;
using shockgp::testing::uniform;

TEST_CASE("exact line is recovered") {
  std::vector<double> E = {0.0, 0.5, 1.0, 2.0, 3.5}, T;
  for (double e : E) T.push_back(100.0 + 5.0 * e);
  const auto m = fit_temperature(E, T);
  CHECK(m.a == doctest::Approx(100.0));
  CHECK(m.b == doctest::Approx(5.0));
}

TEST_CASE("decreasing data clamps the slope") {
  std::vector<double> E = {0.0, 1.0, 2.0, 3.0}, T = {400.0, 390.0, 385.0, 370.0};
  const double eps = 1e-6;
  const auto m = fit_temperature(E, T, eps);
  CHECK(m.b == eps);
  CHECK(m.a == doctest::Approx((400.0 + 390.0 + 385.0 + 370.0) / 4.0 - eps * 1.5));
  CHECK(check_temperature_stability(m));
}

TEST_CASE("noisy line matches normal equations") {
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 5.0);
  std::vector<double> E, T;
  for (int i = 0; i < 30; ++i) {
    E.push_back(uniform(rng, 0.0, 10.0));
    T.push_back(300.0 + 240.0 * E.back() + g(rng));
  }
  Eigen::MatrixXd X(30, 2);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = E[i];
    y(i) = T[i];
  }
  const Eigen::Vector2d beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const auto m = fit_temperature(E, T);
  CHECK(std::abs(m.a - beta(0)) < 1e-10 * std::abs(beta(0)));
  CHECK(std::abs(m.b - beta(1)) < 1e-10 * std::abs(beta(1)));
  // KKT: unconstrained stationarity when the bound is inactive
  double ga = 0.0, gb = 0.0;
  for (int i = 0; i < 30; ++i) {
    const double r = T[i] - m.a - m.b * E[i];
    ga += r;
    gb += r * E[i];
  }
  CHECK(std::abs(ga) < 1e-6);
  CHECK(std::abs(gb) < 1e-5);
}

TEST_CASE("fit needs two points") {
  std::vector<double> E = {1.0}, T = {300.0};
  CHECK_THROWS_AS(fit_temperature(E, T), Error);
}

TEST_CASE("fit output always stable") {
  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> E, T;
    const double slope = uniform(rng, -100.0, 100.0);
    for (int i = 0; i < 6; ++i) {
      E.push_back(uniform(rng, 0.0, 5.0));
      T.push_back(300.0 + slope * E.back() + uniform(rng, -20.0, 20.0));
    }
    const auto m = fit_temperature(E, T, 1e-6);
    CHECK(check_temperature_stability(m));
  }
}

TEST_CASE("pressure stability") {
  const RegionState up{0.0, 0.0, 0.5, 300.0, 0.0};
  // rho_i = 2 at (u_s=4, nu_z=1) requires rho_prev = 1.5; use the density overload directly.
  const auto s = check_pressure_stability(2.0, {4.0, 1.0});
  CHECK(s.dP_dV == doctest::Approx(-36.0));
  CHECK(s.strictly_stable);
  const auto z = check_pressure_stability(2.0, {3.0, 3.0});
  CHECK(z.dP_dV == 0.0);
  CHECK_FALSE(z.strictly_stable);
  const RegionState up2{0.0, 0.0, 1.5, 300.0, 0.0};
  CHECK(check_pressure_stability(up2, {4.0, 1.0}).dP_dV == doctest::Approx(-36.0));
  (void)up;

  Rng rng(6);
  for (int n = 0; n < 1000; ++n) {
    const auto x = shockgp::testing::random_point(rng);
    const auto r = check_pressure_stability(x.upstream, x.front());
    CHECK(r.dP_dV < 0.0);
    CHECK(r.strictly_stable);
  }
}

TEST_CASE("temperature stability verdicts") {
  CHECK(check_temperature_stability(TemperatureModel{0.0, 5.0, 1e-6}));
  CHECK(check_temperature_stability(TemperatureModel{0.0, 1e-6, 1e-6}));
  CHECK_FALSE(check_temperature_stability(TemperatureModel{0.0, 1e-7, 1e-6}));
}
