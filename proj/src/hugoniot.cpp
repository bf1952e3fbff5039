#include "shockgp/hugoniot.hpp"

#include <cmath>
#include <string>

#include "shockgp/errors.hpp"

namespace shockgp {

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::ShockVelocity: return "u_s";
    case Quantity::ParticleVelocity: return "nu_z";
    case Quantity::Pressure: return "P";
    case Quantity::Density: return "rho";
    case Quantity::Temperature: return "T";
    case Quantity::Energy: return "E";
  }
  return "?";
}

namespace {

// u_s - nu_{i-1}; must stay positive for the front to travel into the upstream
// material.
double upstream_gap(const RegionState& upstream, const ShockFrontVars& front) {
  const double gap = front.u_s - upstream.nu_z;
  if (!(gap > kDegenerateFrontTol)) {
    throw Error(ErrorKind::DegenerateFront,
                "u_s - nu_prev = " + std::to_string(gap) + " is not positive");
  }
  return gap;
}

// u_s - nu_i; the density jump blows up as this closes.
double downstream_gap(const ShockFrontVars& front) {
  const double gap = front.u_s - front.nu_z;
  if (!(gap > kDegenerateFrontTol)) {
    throw Error(ErrorKind::DegenerateFront,
                "u_s - nu_z = " + std::to_string(gap) + " is not positive");
  }
  return gap;
}

void require_positive_density(const RegionState& upstream) {
  if (!(upstream.rho > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "upstream density must be positive");
  }
}

}  // namespace

double jump_density(const RegionState& upstream, const ShockFrontVars& front) {
  require_positive_density(upstream);
  const double ahead = upstream_gap(upstream, front);
  const double behind = downstream_gap(front);
  return upstream.rho * ahead / behind;
}

double jump_pressure(const RegionState& upstream, const ShockFrontVars& front) {
  require_positive_density(upstream);
  const double ahead = upstream_gap(upstream, front);
  downstream_gap(front);
  return kGPaPerDensityVelocitySquared * upstream.rho * ahead * (front.nu_z - upstream.nu_z) +
         upstream.P;
}

double jump_energy(const RegionState& upstream, double P, double rho) {
  require_positive_density(upstream);
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidArgument, "downstream density must be positive");
  return upstream.E + 0.5 * (P + upstream.P) * (1.0 / upstream.rho - 1.0 / rho);
}

double jump_energy_closed(const RegionState& upstream, const ShockFrontVars& front) {
  require_positive_density(upstream);
  const double ahead = upstream_gap(upstream, front);
  const double dv = front.nu_z - upstream.nu_z;
  return upstream.E + 0.5 * dv * dv + (upstream.P / upstream.rho) * dv / ahead;
}

double jump_temperature(const RegionState& upstream, const ShockFrontVars& front, double intercept,
                        double slope) {
  return intercept + slope * jump_energy_closed(upstream, front);
}

RegionState jump_state(const RegionState& upstream, const ShockFrontVars& front, double t_intercept,
                       double t_slope) {
  RegionState s;
  s.nu_z = front.nu_z;
  s.P = jump_pressure(upstream, front);
  s.rho = jump_density(upstream, front);
  s.E = jump_energy_closed(upstream, front);
  s.T = t_intercept + t_slope * s.E;
  return s;
}

double jump_value(Quantity q, const RegionState& upstream, const ShockFrontVars& front,
                  double t_intercept, double t_slope) {
  switch (q) {
    case Quantity::ShockVelocity: return front.u_s;
    case Quantity::ParticleVelocity: return front.nu_z;
    case Quantity::Pressure: return jump_pressure(upstream, front);
    case Quantity::Density: return jump_density(upstream, front);
    case Quantity::Temperature: return jump_temperature(upstream, front, t_intercept, t_slope);
    case Quantity::Energy: return jump_energy_closed(upstream, front);
  }
  return 0.0;
}

namespace {

JumpGradient pressure_derivatives(const RegionState& up, const ShockFrontVars& f) {
  const double ahead = upstream_gap(up, f);
  downstream_gap(f);
  const double r = kGPaPerDensityVelocitySquared * up.rho;
  return {r * (f.nu_z - up.nu_z), r * ahead, 0.0, 0.0, r};
}

JumpGradient density_derivatives(const RegionState& up, const ShockFrontVars& f) {
  const double ahead = upstream_gap(up, f);
  const double behind = downstream_gap(f);
  const double behind2 = behind * behind;
  const double behind3 = behind2 * behind;
  const double dv = f.nu_z - up.nu_z;
  JumpGradient g;
  g.d_us = -up.rho * dv / behind2;
  g.d_vz = up.rho * ahead / behind2;
  g.d2_us2 = 2.0 * up.rho * dv / behind3;
  g.d2_vz2 = 2.0 * up.rho * ahead / behind3;
  g.d2_usvz = -up.rho * (ahead + dv) / behind3;
  return g;
}

JumpGradient energy_derivatives(const RegionState& up, const ShockFrontVars& f) {
  const double ahead = upstream_gap(up, f);
  const double dv = f.nu_z - up.nu_z;
  const double c = up.P / up.rho;
  JumpGradient g;
  g.d_us = -c * dv / (ahead * ahead);
  g.d_vz = dv + c / ahead;
  g.d2_us2 = 2.0 * c * dv / (ahead * ahead * ahead);
  g.d2_vz2 = 1.0;
  g.d2_usvz = -c / (ahead * ahead);
  return g;
}

}  // namespace

JumpGradient jump_derivatives(Quantity q, const RegionState& upstream, const ShockFrontVars& front,
                              double t_slope) {
  require_positive_density(upstream);
  switch (q) {
    case Quantity::ShockVelocity: return {1.0, 0.0, 0.0, 0.0, 0.0};
    case Quantity::ParticleVelocity: return {0.0, 1.0, 0.0, 0.0, 0.0};
    case Quantity::Pressure: return pressure_derivatives(upstream, front);
    case Quantity::Density: return density_derivatives(upstream, front);
    case Quantity::Energy: return energy_derivatives(upstream, front);
    case Quantity::Temperature: {
      JumpGradient g = energy_derivatives(upstream, front);
      g.d_us *= t_slope;
      g.d_vz *= t_slope;
      g.d2_us2 *= t_slope;
      g.d2_vz2 *= t_slope;
      g.d2_usvz *= t_slope;
      return g;
    }
  }
  return {};
}

double us_from_mass_conservation(const RegionState& upstream, const RegionState& downstream) {
  const double drho = downstream.rho - upstream.rho;
  if (std::abs(drho) < 1e-12 * std::max(1.0, std::abs(upstream.rho))) {
    throw Error(ErrorKind::NoDensityJump, "upstream and downstream densities are equal");
  }
  return (downstream.rho * downstream.nu_z - upstream.rho * upstream.nu_z) / drho;
}

double us_from_momentum_conservation(const RegionState& upstream, const RegionState& downstream) {
  require_positive_density(upstream);
  const double dv = downstream.nu_z - upstream.nu_z;
  if (std::abs(dv) < kDegenerateFrontTol) {
    throw Error(ErrorKind::DegenerateFront, "no particle-velocity jump across the front");
  }
  return upstream.nu_z +
         (downstream.P - upstream.P) / (kGPaPerDensityVelocitySquared * upstream.rho * dv);
}

}  // namespace shockgp
