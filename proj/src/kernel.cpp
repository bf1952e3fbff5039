#include "shockgp/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "shockgp/errors.hpp"

namespace shockgp {

double output_scale(int l, double s1, double s2) {
  switch (l) {
    case 2:
    case 3: return s1;
    case 4: return s2;
    default: return 1.0;
  }
}

double se_kernel(double up, double up2, double length_scale) {
  const double d = (up - up2) / length_scale;
  return std::exp(-0.5 * d * d);
}

Eigen::Matrix2d coreg_matrix(const Hyperparameters& theta) {
  Eigen::Matrix2d B;
  const double c = theta.rho_corr * theta.sigma_us * theta.sigma_vz;
  B << theta.sigma_us * theta.sigma_us, c, c, theta.sigma_vz * theta.sigma_vz;
  return B;
}

Eigen::MatrixXd base_cov(std::span<const double> up, const Hyperparameters& theta,
                         bool with_noise) {
  const Eigen::Index n = static_cast<Eigen::Index>(up.size());
  const Eigen::Matrix2d B = coreg_matrix(theta);
  Eigen::MatrixXd K(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double kv = se_kernel(up[j], up[k], theta.length_scale);
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) K(l * n + j, m * n + k) = B(l, m) * kv;
    }
  }
  if (with_noise) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K(j, j) += theta.noise_us() * theta.noise_us();
      K(n + j, n + j) += theta.noise_vz() * theta.noise_vz();
    }
  }
  return K;
}

Eigen::Matrix<double, 5, 2> jacobian(const ExpansionPoint& x, double t_slope) {
  Eigen::Matrix<double, 5, 2> J;
  for (int l = 0; l < kOutputs; ++l) {
    const JumpGradient g = jump_derivatives(kStateOrder[l], x.upstream, x.front(), t_slope);
    J(l, 0) = g.d_us;
    J(l, 1) = g.d_vz;
  }
  return J;
}

Eigen::MatrixXd cross_sigma(std::span<const DesignPoint> a, std::span<const DesignPoint> b,
                            const Hyperparameters& theta, double t_slope) {
  const Eigen::Index M = static_cast<Eigen::Index>(a.size());
  const Eigen::Index N = static_cast<Eigen::Index>(b.size());
  const Eigen::Matrix2d B = coreg_matrix(theta);
  Eigen::Matrix<double, 5, 1> s;
  for (int l = 0; l < kOutputs; ++l) s(l) = output_scale(l, theta.s1, theta.s2);

  std::vector<Eigen::Matrix<double, 5, 2>> Ja(M), Jb(N);
  for (Eigen::Index j = 0; j < M; ++j) Ja[j] = s.asDiagonal() * jacobian(a[j].x, t_slope);
  for (Eigen::Index k = 0; k < N; ++k) Jb[k] = s.asDiagonal() * jacobian(b[k].x, t_slope);

  Eigen::MatrixXd out(kOutputs * M, kOutputs * N);
  for (Eigen::Index j = 0; j < M; ++j) {
    const Eigen::Matrix<double, 5, 2> JB = Ja[j] * B;
    for (Eigen::Index k = 0; k < N; ++k) {
      const double kv = se_kernel(a[j].u_p, b[k].u_p, theta.length_scale);
      const Eigen::Matrix<double, 5, 5> blk = kv * (JB * Jb[k].transpose());
      for (int l = 0; l < kOutputs; ++l)
        for (int m = 0; m < kOutputs; ++m) out(l * M + j, m * N + k) = blk(l, m);
    }
  }
  return out;
}

namespace {

void add_noise(Eigen::MatrixXd& S, std::size_t n, const Hyperparameters& theta,
               std::span<const double> noise_var) {
  const Eigen::Index N = static_cast<Eigen::Index>(n);
  if (noise_var.empty()) {
    for (int l = 0; l < kOutputs; ++l)
      for (Eigen::Index j = 0; j < N; ++j) S(l * N + j, l * N + j) += theta.noise[l] * theta.noise[l];
    return;
  }
  if (static_cast<Eigen::Index>(noise_var.size()) != S.rows()) {
    throw Error(ErrorKind::InvalidArgument, "noise vector length does not match Sigma");
  }
  for (Eigen::Index i = 0; i < S.rows(); ++i) S(i, i) += noise_var[i];
}

}  // namespace

Eigen::MatrixXd assemble_sigma(std::span<const DesignPoint> pts, const Hyperparameters& theta,
                               double t_slope, std::span<const double> noise_var) {
  Eigen::MatrixXd S = cross_sigma(pts, pts, theta, t_slope);
  add_noise(S, pts.size(), theta, noise_var);
  return S;
}

Eigen::MatrixXd assemble_sigma_explicit(std::span<const DesignPoint> pts,
                                        const Hyperparameters& theta, double t_slope,
                                        std::span<const double> noise_var) {
  const Eigen::Index N = static_cast<Eigen::Index>(pts.size());
  const Eigen::Matrix2d B = coreg_matrix(theta);
  Eigen::MatrixXd S(kOutputs * N, kOutputs * N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index k = 0; k < N; ++k) {
      const double kv = se_kernel(pts[j].u_p, pts[k].u_p, theta.length_scale);
      const CrossKernel c{B(0, 0) * kv, B(0, 1) * kv, B(1, 0) * kv, B(1, 1) * kv};
      for (int l = 0; l < kOutputs; ++l) {
        for (int m = 0; m < kOutputs; ++m) {
          S(l * N + j, m * N + k) = output_scale(l, theta.s1, theta.s2) *
                                    output_scale(m, theta.s1, theta.s2) *
                                    explicit_block(kStateOrder[l], kStateOrder[m], pts[j].x,
                                                   pts[k].x, c, t_slope);
        }
      }
    }
  }
  add_noise(S, pts.size(), theta, noise_var);
  return S;
}

double BlockCovariance::log_det() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

Eigen::MatrixXd BlockCovariance::half_solve(const Eigen::MatrixXd& b) const {
  return L.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd BlockCovariance::solve(const Eigen::MatrixXd& b) const {
  return L.transpose().triangularView<Eigen::Upper>().solve(half_solve(b));
}

BlockCovariance factorize(Eigen::MatrixXd sigma) {
  const Eigen::Index n = sigma.rows();
  if (n == 0 || sigma.cols() != n) throw Error(ErrorKind::InvalidArgument, "Sigma must be square");
  if (!sigma.allFinite()) throw Error(ErrorKind::NonPSD, "Sigma has non-finite entries");
  const double scale = sigma.diagonal().sum() / static_cast<double>(n);
  if (!(scale > 0.0)) throw Error(ErrorKind::NonPSD, "Sigma has non-positive trace");

  BlockCovariance bc;
  bc.sigma = std::move(sigma);
  Eigen::MatrixXd work;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double jit = kJitterStart * scale; jit <= kJitterCap * scale; jit *= 2.0) {
    work = bc.sigma;
    work.diagonal().array() += jit;
    llt.compute(work);
    if (llt.info() == Eigen::Success) {
      bool ok = true;
      const auto& L = llt.matrixLLT();
      for (Eigen::Index i = 0; i < n && ok; ++i) ok = L(i, i) > 0.0 && std::isfinite(L(i, i));
      if (ok) {
        bc.jitter = jit;
        bc.L = llt.matrixL();
        return bc;
      }
    }
  }
  throw Error(ErrorKind::NonPSD, "Cholesky failed up to the jitter cap");
}

OutputScales scales_from_data(const Dataset& data) {
  double m1 = 0.0, m2 = 0.0;
  for (const auto& o : data) {
    m1 = std::max({m1, std::abs(o.value[kP]), std::abs(o.value[kRho])});
    m2 = std::max(m2, std::abs(o.value[kT]));
  }
  OutputScales s;
  if (m1 > 0.0) s.s1 = 1.0 / m1;
  if (m2 > 0.0) s.s2 = 1.0 / m2;
  return s;
}

namespace {

Dataset rescale(const Dataset& data, double f1, double f2) {
  Dataset out = data;
  for (auto& o : out) {
    for (int c : {kP, kRho}) {
      o.value[c] *= f1;
      o.stddev[c] *= f1;
    }
    o.value[kT] *= f2;
    o.stddev[kT] *= f2;
  }
  return out;
}

}  // namespace

Dataset scale_outputs(const Dataset& data, double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "scales must be positive");
  return rescale(data, s1, s2);
}

Dataset unscale_outputs(const Dataset& data, double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "scales must be positive");
  return rescale(data, 1.0 / s1, 1.0 / s2);
}

void unscale_predictions(Eigen::VectorXd& mean, Eigen::MatrixXd& cov, double s1, double s2) {
  const Eigen::Index M = mean.size() / kOutputs;
  Eigen::VectorXd f(mean.size());
  for (int l = 0; l < kOutputs; ++l) f.segment(l * M, M).setConstant(1.0 / output_scale(l, s1, s2));
  mean = mean.cwiseProduct(f);
  // f_i f_j formed first so a symmetric input stays bitwise symmetric
  cov = cov.cwiseProduct(f * f.transpose());
}

}  // namespace shockgp
