#pragma once

#include <span>

#include "shockgp/hugoniot.hpp"

namespace shockgp {

inline constexpr double kDefaultSlopeFloor = 1e-6;

/// Linear temperature-energy surrogate T = a + b E with the stability floor b >= epsilon.
struct TemperatureModel {
  double a = 0.0;
  double b = 1.0;
  double epsilon = kDefaultSlopeFloor;

  double temperature(double E) const { return a + b * E; }
  double energy(double T) const { return (T - a) / b; }
};

/// Least squares fit of T against E subject to b >= epsilon. When the
/// unconstrained slope falls below the floor the constraint is active and the
/// intercept is re-fit at b = epsilon.
TemperatureModel fit_temperature(std::span<const double> E, std::span<const double> T,
                                 double epsilon = kDefaultSlopeFloor);

struct PressureStability {
  double dP_dV = 0.0;  // (dP/dV) along the jump relation, GPa per (cm^3/g)
  bool strictly_stable = false;
};

/// dP/dV along the momentum jump, computed by the chain rule through nu_z.
/// Equals -rho_i^2 (u_s - nu_z)^2.
PressureStability check_pressure_stability(const RegionState& upstream, const ShockFrontVars& front);

/// The same slope from a known downstream density; u_s == nu_z yields the
/// non-strict boundary value 0.
PressureStability check_pressure_stability(double rho_downstream, const ShockFrontVars& front);

bool check_temperature_stability(const TemperatureModel& model);

}  // namespace shockgp
