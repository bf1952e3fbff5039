#pragma once

// Delta-method moments of the jump quantities when the front variables
// (u_s, nu_z) are Gaussian. Two independent routes are provided:
//
//   delta_mean / delta_cov       generic second-order mean and first-order
//                                covariance assembled from jump_derivatives();
//   explicit_mean / explicit_block
//                                the closed-form block expressions written out
//                                term by term.
//
// The routes must agree to rounding; tests hold them against each other and
// against Monte-Carlo push-through. The expansion point is used as given: the
// mean correction does not feed back into it.

#include <span>

#include <Eigen/Core>

#include "shockgp/hugoniot.hpp"
#include "shockgp/thermo.hpp"

namespace shockgp {

/// Means and (co)variances of (u_s, nu_z) at one point.
struct FrontMoments {
  double mean_us = 0.0;
  double mean_vz = 0.0;
  double k_usus = 0.0;
  double k_vzvz = 0.0;
  double k_usvz = 0.0;
};

/// Cross-covariance of (u_s, nu_z) between point j (first index) and point k.
struct CrossKernel {
  double k_usus = 0.0;
  double k_usvz = 0.0;  // Cov(u_s at j, nu_z at k)
  double k_vzus = 0.0;  // Cov(nu_z at j, u_s at k)
  double k_vzvz = 0.0;

  CrossKernel transposed() const { return {k_usus, k_vzus, k_usvz, k_vzvz}; }
  static CrossKernel from_point(const FrontMoments& m) {
    return {m.k_usus, m.k_usvz, m.k_usvz, m.k_vzvz};
  }
};

/// Where the Taylor expansion is taken for one data point.
struct ExpansionPoint {
  RegionState upstream;
  double mean_us = 0.0;
  double mean_vz = 0.0;

  ShockFrontVars front() const { return {mean_us, mean_vz}; }
};

/// Mean vector and 5x5 covariance of (u_s, nu_z, P, rho, T) for a point pair.
struct StateMoments {
  Eigen::Matrix<double, 5, 1> mean;
  Eigen::Matrix<double, 5, 5> cov;
};

inline constexpr Quantity kStateOrder[5] = {Quantity::ShockVelocity, Quantity::ParticleVelocity,
                                            Quantity::Pressure, Quantity::Density,
                                            Quantity::Temperature};

double delta_mean(Quantity q, const RegionState& upstream, const FrontMoments& m,
                  const TemperatureModel& temp);

double delta_cov(Quantity ql, Quantity qm, const ExpansionPoint& j, const ExpansionPoint& k,
                 const CrossKernel& cross, double t_slope);

double explicit_mean(Quantity q, const RegionState& upstream, const FrontMoments& m,
                     const TemperatureModel& temp);

double explicit_block(Quantity ql, Quantity qm, const ExpansionPoint& j, const ExpansionPoint& k,
                      const CrossKernel& cross, double t_slope);

/// Mean at point j and covariance between points j and k through the generic route.
StateMoments state_moments(const ExpansionPoint& j, const ExpansionPoint& k, const FrontMoments& mj,
                           const CrossKernel& cross, const TemperatureModel& temp);

/// First-order variance of a scalar function of independent inputs.
double propagate_independent(std::span<const double> gradient, std::span<const double> stddev);

}  // namespace shockgp
