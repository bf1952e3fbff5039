#include "shockgp/thermo.hpp"

#include <cmath>

#include "shockgp/errors.hpp"

namespace shockgp {

TemperatureModel fit_temperature(std::span<const double> E, std::span<const double> T,
                                 double epsilon) {
  if (E.size() != T.size()) {
    throw Error(ErrorKind::InvalidArgument, "energy and temperature vectors differ in length");
  }
  if (E.size() < 2) throw Error(ErrorKind::InsufficientData, "temperature fit needs >= 2 points");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "slope floor must be positive");

  const double n = static_cast<double>(E.size());
  double mean_e = 0.0, mean_t = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    if (!std::isfinite(E[i]) || !std::isfinite(T[i])) {
      throw Error(ErrorKind::InvalidArgument, "non-finite value in temperature fit");
    }
    mean_e += E[i];
    mean_t += T[i];
  }
  mean_e /= n;
  mean_t /= n;

  double see = 0.0, set = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    see += (E[i] - mean_e) * (E[i] - mean_e);
    set += (E[i] - mean_e) * (T[i] - mean_t);
  }

  TemperatureModel m;
  m.epsilon = epsilon;
  // A constant-energy data set carries no slope information; the floor is the
  // only admissible answer.
  const double slope = see > 0.0 ? set / see : epsilon;
  m.b = slope >= epsilon ? slope : epsilon;
  m.a = mean_t - m.b * mean_e;
  return m;
}

PressureStability check_pressure_stability(const RegionState& upstream, const ShockFrontVars& front) {
  const JumpGradient dP = jump_derivatives(Quantity::Pressure, upstream, front);
  const JumpGradient drho = jump_derivatives(Quantity::Density, upstream, front);
  const double rho = jump_density(upstream, front);
  // V = 1/rho, so dV/dnu = -drho/dnu / rho^2.
  const double dV_dnu = -drho.d_vz / (rho * rho);
  PressureStability s;
  s.dP_dV = dP.d_vz / dV_dnu;
  s.strictly_stable = s.dP_dV < 0.0;
  return s;
}

PressureStability check_pressure_stability(double rho_downstream, const ShockFrontVars& front) {
  const double gap = front.u_s - front.nu_z;
  PressureStability s;
  s.dP_dV = -kGPaPerDensityVelocitySquared * rho_downstream * rho_downstream * gap * gap;
  s.strictly_stable = s.dP_dV < 0.0;
  return s;
}

bool check_temperature_stability(const TemperatureModel& model) {
  return model.epsilon > 0.0 && model.b >= model.epsilon;
}

}  // namespace shockgp
