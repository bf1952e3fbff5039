#pragma once

// Generalized Rankine-Hugoniot jump relations across the i-th wave front and
// their exact derivatives with respect to the front variables (u_s, nu_z).
//
// Units: velocities in km/s, density in g/cm^3, pressure in GPa, temperature
// in K, specific internal energy in (km/s)^2 (= MJ/kg = GPa cm^3/g). With this
// choice rho * u^2 is a pressure in GPa with no conversion factor.

#include <string_view>

namespace shockgp {

/// 1 g/cm^3 * (km/s)^2 expressed in GPa.
inline constexpr double kGPaPerDensityVelocitySquared = 1.0;

/// Fronts closer than this (|u_s - nu|, km/s) are treated as singular.
inline constexpr double kDegenerateFrontTol = 1e-9;

/// Thermodynamic state of one material region.
struct RegionState {
  double nu_z = 0.0;  // particle velocity [km/s]
  double P = 0.0;     // pressure [GPa]
  double rho = 0.0;   // density [g/cm^3]
  double T = 0.0;     // temperature [K]
  double E = 0.0;     // specific internal energy [(km/s)^2]
};

/// Variables of one shock front: its speed and the particle velocity behind it.
struct ShockFrontVars {
  double u_s = 0.0;
  double nu_z = 0.0;
};

/// First and second partial derivatives of a jump quantity in (u_s, nu_z).
struct JumpGradient {
  double d_us = 0.0;
  double d_vz = 0.0;
  double d2_us2 = 0.0;
  double d2_vz2 = 0.0;
  double d2_usvz = 0.0;
};

/// Augmented outputs, in the order used by the block covariance.
enum class Quantity { ShockVelocity, ParticleVelocity, Pressure, Density, Temperature, Energy };

std::string_view to_string(Quantity q);

double jump_density(const RegionState& upstream, const ShockFrontVars& front);
double jump_pressure(const RegionState& upstream, const ShockFrontVars& front);

/// Hugoniot energy from already-computed downstream pressure and density.
double jump_energy(const RegionState& upstream, double P, double rho);

/// Energy written directly in the front variables.
double jump_energy_closed(const RegionState& upstream, const ShockFrontVars& front);

/// Temperature through the linear surrogate T = intercept + slope * E.
double jump_temperature(const RegionState& upstream, const ShockFrontVars& front, double intercept,
                        double slope);

/// Full downstream state behind the front (T through the linear surrogate).
RegionState jump_state(const RegionState& upstream, const ShockFrontVars& front, double t_intercept,
                       double t_slope);

/// Value of quantity q behind the front. Temperature needs the surrogate.
double jump_value(Quantity q, const RegionState& upstream, const ShockFrontVars& front,
                  double t_intercept = 0.0, double t_slope = 0.0);

/// Analytic derivatives. For Temperature the energy derivatives are scaled by
/// t_slope; u_s and nu_z are the identity maps.
JumpGradient jump_derivatives(Quantity q, const RegionState& upstream, const ShockFrontVars& front,
                              double t_slope = 0.0);

/// Shock speed implied by mass conservation between two measured states.
double us_from_mass_conservation(const RegionState& upstream, const RegionState& downstream);

/// Shock speed implied by momentum conservation between two measured states.
double us_from_momentum_conservation(const RegionState& upstream, const RegionState& downstream);

}  // namespace shockgp
