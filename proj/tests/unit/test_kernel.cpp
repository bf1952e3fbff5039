#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "shockgp/errors.hpp"
#include "shockgp/kernel.hpp"
#include "shockgp/synth.hpp"
#include "test_support.hpp"

using namespace shockgp;
using shockgp::testing::Rng;
using shockgp::testing::uniform;

namespace {

Hyperparameters random_theta(Rng& rng) {
  Hyperparameters t;
  t.sigma_us = std::exp(uniform(rng, -3.0, 1.0));
  t.sigma_vz = std::exp(uniform(rng, -4.0, 0.0));
  t.rho_corr = uniform(rng, -0.99, 0.99);
  t.length_scale = std::exp(uniform(rng, -1.5, 2.5));
  for (auto& s : t.noise) s = std::exp(uniform(rng, -8.0, -3.0));
  t.s1 = 1.0 / 120.0;
  t.s2 = 1.0 / 4000.0;
  return t;
}

std::vector<DesignPoint> synthetic_points(int n) {
  SynthConfig cfg;
  std::vector<DesignPoint> pts;
  for (int j = 0; j < n; ++j) {
    const double up = 0.25 * (j + 1);
    const auto t = synth_truth(cfg, up).front();
    pts.push_back({up, {t.upstream, t.u_s, t.state.nu_z}});
  }
  return pts;
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("se_kernel") {
  CHECK(se_kernel(1.3, 1.3, 0.7) == 1.0);
  CHECK(se_kernel(1.0, 1.7, 0.7) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(se_kernel(0.0, 5.0, 1e8) == doctest::Approx(1.0));
}

TEST_CASE("coreg_matrix") {
  Hyperparameters t;
  t.sigma_us = 2.0;
  t.sigma_vz = 0.5;
  t.rho_corr = 0.0;
  CHECK(coreg_matrix(t)(0, 1) == 0.0);
  for (double r : {0.999, -0.999}) {
    t.rho_corr = r;
    const Eigen::Matrix2d B = coreg_matrix(t);
    CHECK(B.determinant() == doctest::Approx(4.0 * 0.25 * (1 - r * r)).epsilon(1e-12));
    // closed-form 2x2 eigenvalues
    const double tr = B.trace(), det = B.determinant();
    const double l1 = 0.5 * (tr - std::sqrt(tr * tr - 4 * det)), l2 = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(B);
    CHECK(es.eigenvalues()(0) == doctest::Approx(l1).epsilon(1e-9));
    CHECK(es.eigenvalues()(1) == doctest::Approx(l2));
    CHECK(l1 >= 0.0);
  }
}

TEST_CASE("base_cov") {
  Rng rng(1);
  Hyperparameters t = random_theta(rng);
  const double one[1] = {2.0};
  Hyperparameters t0 = t;
  t0.noise = {};
  CHECK(base_cov(one, t0).isApprox(coreg_matrix(t0), 1e-15));

  std::vector<double> up(8);
  for (auto& u : up) u = uniform(rng, 0.0, 6.0);
  const Eigen::MatrixXd K = base_cov(up, t, false);
  CHECK((K - K.transpose()).norm() == 0.0);
  CHECK(min_eig(K) >= -1e-10);
  const Eigen::Matrix2d B = coreg_matrix(t);
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k)
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m)
          CHECK(K(l * 8 + j, m * 8 + k) == B(l, m) * se_kernel(up[j], up[k], t.length_scale));
  const Eigen::MatrixXd Kn = base_cov(up, t, true);
  for (int j = 0; j < 8; ++j) {
    CHECK(Kn(j, j) - K(j, j) == doctest::Approx(t.noise[0] * t.noise[0]));
    CHECK(Kn(8 + j, 8 + j) - K(8 + j, 8 + j) == doctest::Approx(t.noise[1] * t.noise[1]));
  }
}

TEST_CASE("assemble_sigma: pass-through rows, explicit agreement, noise diagonal") {
  Rng rng(2);
  const auto pts = synthetic_points(21);
  const Hyperparameters t = random_theta(rng);
  const double b = 250.0;
  const Eigen::MatrixXd S = assemble_sigma(pts, t, b);
  const Eigen::MatrixXd L = cross_sigma(pts, pts, t, b);
  std::vector<double> up;
  for (const auto& p : pts) up.push_back(p.u_p);
  const Eigen::MatrixXd K = base_cov(up, t, false);
  CHECK((L.topLeftCorner(42, 42) - K).cwiseAbs().maxCoeff() <= 1e-15 * K.cwiseAbs().maxCoeff());

  const Eigen::MatrixXd E = assemble_sigma_explicit(pts, t, b);
  CHECK((S - E).cwiseAbs().maxCoeff() <= 1e-12 * S.cwiseAbs().maxCoeff());

  // one entry rebuilt by hand from the moments module
  const int j = 4, k = 11, N = 21;
  const Eigen::Matrix2d B = coreg_matrix(t);
  const double kv = se_kernel(pts[j].u_p, pts[k].u_p, t.length_scale);
  const CrossKernel ck{B(0, 0) * kv, B(0, 1) * kv, B(1, 0) * kv, B(1, 1) * kv};
  const double ent = explicit_block(Quantity::Pressure, Quantity::Temperature, pts[j].x, pts[k].x, ck, b);
  CHECK(S(2 * N + j, 4 * N + k) == doctest::Approx(t.s1 * t.s2 * ent).epsilon(1e-12));

  const Eigen::MatrixXd diff = S - L;
  for (int l = 0; l < 5; ++l)
    CHECK(diff(l * N + 3, l * N + 3) == doctest::Approx(t.noise[l] * t.noise[l]).epsilon(1e-8));
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * S.cwiseAbs().maxCoeff());

  std::vector<double> nv(5 * N, 1e-4);
  const Eigen::MatrixXd Sf = assemble_sigma(pts, t, b, nv);
  CHECK((Sf - L).diagonal().isApproxToConstant(1e-4, 1e-8));
}

TEST_CASE("structural PSD across random hyperparameters") {
  Rng rng(3);
  const auto pts = synthetic_points(21);
  for (int n = 0; n < 50; ++n) {
    Hyperparameters t = random_theta(rng);
    t.noise = {};
    const Eigen::MatrixXd S = assemble_sigma(pts, t, uniform(rng, 50.0, 500.0));
    CHECK(min_eig(S) >= -1e-8 * std::max(1.0, S.diagonal().maxCoeff()));
  }
}

TEST_CASE("factorize: jitter schedule and failure") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 1.0, 1.0, 1.0;  // singular PSD
  const BlockCovariance c = factorize(A);
  CHECK(c.jitter >= kJitterStart * 1.0);
  CHECK(c.jitter <= kJitterCap * 1.0);
  const Eigen::MatrixXd R = c.L * c.L.transpose();
  CHECK((R - A - c.jitter * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  Eigen::MatrixXd Bad(2, 2);
  Bad << 1.0, 0.0, 0.0, -1.0;
  try {
    factorize(Bad);
    FAIL("expected NonPSD");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPSD);
  }

  Eigen::MatrixXd S(3, 3);
  S << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const BlockCovariance f = factorize(S);
  CHECK(f.log_det() == doctest::Approx(std::log((S + f.jitter * Eigen::MatrixXd::Identity(3, 3)).determinant())));
  const Eigen::VectorXd rhs = Eigen::Vector3d(1, 2, 3);
  CHECK((S * f.solve(rhs) - rhs).norm() < 1e-8);
}

TEST_CASE("output scaling") {
  const Dataset d = synth_observations(SynthConfig{}, synth_grid(SynthConfig{}), 5);
  const Dataset same = scale_outputs(d, 1.0, 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(same[i].value == d[i].value);

  const OutputScales s = scales_from_data(d);
  const Dataset sc = scale_outputs(d, s.s1, s.s2);
  for (const auto& o : sc) {
    CHECK(std::abs(o.value[kP]) <= 1.0 + 1e-15);
    CHECK(std::abs(o.value[kRho]) <= 1.0 + 1e-15);
    CHECK(std::abs(o.value[kT]) <= 1.0 + 1e-15);
  }
  const Dataset back = unscale_outputs(sc, s.s1, s.s2);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int c = 0; c < 6; ++c)
      CHECK(std::abs(back[i].value[c] - d[i].value[c]) <= 1e-15 * std::abs(d[i].value[c]) + 1e-300);

  Eigen::VectorXd m = Eigen::VectorXd::Ones(10);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(10, 10);
  unscale_predictions(m, c, 0.5, 0.25);
  CHECK(m(4) == 2.0);  // P block
  CHECK(m(8) == 4.0);  // T block
  CHECK(c(8, 8) == 16.0);
  CHECK(m(0) == 1.0);
}
