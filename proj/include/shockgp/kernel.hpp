#pragma once

// ICM kernel on (u_s, nu_z) and the 5N x 5N block covariance of the
// augmented outputs (u_s, nu_z, P, rho, T). Rows and columns are ordered
// output-major: index = l * N + j for output l at point j.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "shockgp/moments.hpp"
#include "shockgp/observation.hpp"
#include "shockgp/thermo.hpp"

namespace shockgp {

inline constexpr int kOutputs = 5;

struct Hyperparameters {
  double sigma_us = 1.0;
  double sigma_vz = 1.0;
  double rho_corr = 0.0;
  double length_scale = 1.0;
  // Noise standard deviations per output, in scaled units. Only the first two
  // enter base_cov().
  std::array<double, kOutputs> noise{};
  double s1 = 1.0;  // P and rho scale
  double s2 = 1.0;  // T scale

  double noise_us() const { return noise[0]; }
  double noise_vz() const { return noise[1]; }
};

/// Multiplier applied to output l by the scaling transform.
double output_scale(int l, double s1, double s2);

double se_kernel(double up, double up2, double length_scale);

Eigen::Matrix2d coreg_matrix(const Hyperparameters& theta);

/// (B kron K) + D over the two base outputs, 2N x 2N.
Eigen::MatrixXd base_cov(std::span<const double> up, const Hyperparameters& theta,
                         bool with_noise = true);

/// Point at which the jump relations are linearized: u_p plus the expansion point.
struct DesignPoint {
  double u_p = 0.0;
  ExpansionPoint x;
};

/// 5 x 2 first-derivative block of (u_s, nu_z, P, rho, T) in (u_s, nu_z).
Eigen::Matrix<double, 5, 2> jacobian(const ExpansionPoint& x, double t_slope);

/// Latent (noise-free) covariance between the augmented outputs at points a
/// and points b, scaled by (s1, s2). 5M x 5N.
Eigen::MatrixXd cross_sigma(std::span<const DesignPoint> a, std::span<const DesignPoint> b,
                            const Hyperparameters& theta, double t_slope);

struct BlockCovariance {
  Eigen::MatrixXd sigma;  // as assembled, before jitter
  double jitter = 0.0;
  Eigen::MatrixXd L;  // lower Cholesky factor of sigma + jitter * I

  Eigen::Index size() const { return sigma.rows(); }
  double log_det() const;
  /// L^{-1} b
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& b) const;
  /// (sigma + jitter I)^{-1} b
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
};

/// Relative jitter schedule: start * mean diagonal, doubled until cap.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterCap = 1e-4;

/// Sigma = S J (B kron K) J^T S + diag(noise_var). noise_var has length 5N in
/// scaled units; pass an empty span to use theta.noise for every point.
Eigen::MatrixXd assemble_sigma(std::span<const DesignPoint> pts, const Hyperparameters& theta,
                               double t_slope, std::span<const double> noise_var = {});

/// Same matrix built block by block from explicit_block(); test oracle only.
Eigen::MatrixXd assemble_sigma_explicit(std::span<const DesignPoint> pts,
                                        const Hyperparameters& theta, double t_slope,
                                        std::span<const double> noise_var = {});

/// Cholesky with the jitter schedule; throws NonPSD when the cap is reached.
BlockCovariance factorize(Eigen::MatrixXd sigma);

struct OutputScales {
  double s1 = 1.0;
  double s2 = 1.0;
};

/// s1 = 1/max(|P|, |rho|), s2 = 1/max(|T|) over the data.
OutputScales scales_from_data(const Dataset& data);

/// P, rho (and their std) times s1, T times s2. E is left alone.
Dataset scale_outputs(const Dataset& data, double s1, double s2);
Dataset unscale_outputs(const Dataset& data, double s1, double s2);

/// Undo the scaling on a stacked mean/covariance over M points.
void unscale_predictions(Eigen::VectorXd& mean, Eigen::MatrixXd& cov, double s1, double s2);

}  // namespace shockgp
