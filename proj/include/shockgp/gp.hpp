#pragma once

// MAP training of the constrained multi-output GP and joint posterior
// prediction of (u_s, nu_z, P, rho, T).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "shockgp/kernel.hpp"
#include "shockgp/observation.hpp"
#include "shockgp/optimize.hpp"
#include "shockgp/thermo.hpp"

namespace shockgp {

/// Linear prior mean for the two base outputs.
struct MeanFunction {
  double us0 = 0.0, us1 = 0.0;
  double vz0 = 0.0, vz1 = 0.0;

  double us(double up) const { return us0 + us1 * up; }
  double vz(double up) const { return vz0 + vz1 * up; }
};

/// Ordinary least squares lines of u_s and nu_z against u_p.
MeanFunction fit_mean_function(std::span<const double> up, std::span<const double> us,
                               std::span<const double> vz);

ExpansionPoint expansion_at(const MeanFunction& mf, double up, const RegionState& upstream);

/// Prior mean of the 5N stacked outputs (scaled). Derived outputs get the
/// second-order correction from the latent variances in B.
Eigen::VectorXd prior_mean(std::span<const DesignPoint> pts, const Hyperparameters& theta,
                           const TemperatureModel& temp);

/// One row of a training set together with the state ahead of its front.
struct TrainingRow {
  ShockObservation obs;
  RegionState upstream;
};

struct GpConfig {
  int restarts = 8;
  std::uint64_t seed = 1234;
  double ell_min = 0.1;  // km/s of u_p
  double ell_max = 20.0;
  double slope_floor = kDefaultSlopeFloor;
  OptimOptions optim{};
  double prior_log_sd = 1.0;   // log-normal priors on sigma, ell, noise
  double prior_atanh_sd = 1.0;  // Gaussian prior on atanh(rho_corr)
};

/// Transformed hyperparameter vector:
///   [log s_us, log s_vz, atanh rho, log ell, (log noise_l, l = 0..4)].
/// The noise block is present only when noise is trained.
struct ThetaPrior {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Hyperparameters decode_theta(const Eigen::VectorXd& z, double s1, double s2);
Eigen::VectorXd encode_theta(const Hyperparameters& theta, bool with_noise);

/// Everything the objective needs, all outputs scaled.
struct GpProblem {
  std::vector<DesignPoint> pts;
  Eigen::VectorXd y;          // 5N stacked observations
  Eigen::VectorXd noise_var;  // 5N; empty when noise is trained
  TemperatureModel temp;
  OutputScales scales;
  MeanFunction mean_fn;

  bool noise_trained() const { return noise_var.size() == 0; }
  Eigen::Index n() const { return static_cast<Eigen::Index>(pts.size()); }
};

/// Builds the scaled problem: T-E fit, scales, mean function, design points.
GpProblem make_problem(std::span<const TrainingRow> rows, double slope_floor = kDefaultSlopeFloor);

double neg_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                          const BlockCovariance& cov);
double neg_log_likelihood(const GpProblem& problem, const Hyperparameters& theta);

/// Independent Gaussian negative log density in transformed coordinates.
double neg_log_prior(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                     const Eigen::VectorXd& sd);

ThetaPrior default_prior(const GpProblem& problem, const GpConfig& cfg);

struct TrainedModel {
  Hyperparameters theta;
  TemperatureModel temp;
  OutputScales scales;
  MeanFunction mean_fn;
  std::vector<DesignPoint> pts;
  Eigen::VectorXd y;
  Eigen::VectorXd noise_var;  // 5N, scaled
  bool noise_trained = false;
  BlockCovariance cov;
  Eigen::VectorXd alpha;  // Sigma^{-1} (y - mu)
  double objective = 0.0;
  double nll = 0.0;
  int restarts_succeeded = 0;

  std::vector<double> inputs() const;
};

/// Rebuilds factor and alpha from theta and the stored problem.
void finalize_model(TrainedModel& m);

TrainedModel train(std::span<const TrainingRow> rows, const GpConfig& cfg);

struct PosteriorPrediction {
  std::vector<double> u_p;
  Eigen::VectorXd mean;  // 5M, physical units, output-major
  Eigen::MatrixXd cov;   // 5M x 5M
  std::vector<char> pressure_stable;

  Eigen::Index size() const { return static_cast<Eigen::Index>(u_p.size()); }
  double mean_at(int l, Eigen::Index j) const { return mean(l * size() + j); }
  double var_at(int l, Eigen::Index j) const { return cov(l * size() + j, l * size() + j); }
  Eigen::Matrix<double, 5, 1> point_mean(Eigen::Index j) const;
  Eigen::Matrix<double, 5, 5> point_block(Eigen::Index j) const;
  /// State behind the front at j (E from the temperature surrogate).
  RegionState state_at(Eigen::Index j, const TemperatureModel& temp) const;
};

PosteriorPrediction predict(const TrainedModel& model, std::span<const double> up,
                            std::span<const RegionState> upstream);

/// Prior (unconditioned) predictive; used for checks.
PosteriorPrediction prior_predict(const TrainedModel& model, std::span<const double> up,
                                  std::span<const RegionState> upstream);

/// Diagonal observation-noise variance of one output at a training-like row,
/// physical units.
double noise_variance(const TrainedModel& model, int output);

/// Pressure (dP/dV < 0 at every design point) and temperature (b >= eps)
/// checks; throws StabilityViolation.
void check_stability(const TrainedModel& model);

}  // namespace shockgp
