#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace shockgp {

enum class WaveLabel { Lead, Plastic, PhaseTransformation };

std::string_view to_string(WaveLabel w);
WaveLabel wave_from_string(std::string_view s);  // throws MalformedInput

/// Column order of the measured values in an observation row.
enum Column : int { kUs = 0, kVz = 1, kP = 2, kRho = 3, kT = 4, kE = 5 };

/// One training row: piston velocity, wave label and the measured shocked
/// state with per-value standard deviations.
struct ShockObservation {
  double u_p = 0.0;
  WaveLabel wave = WaveLabel::Lead;
  std::array<double, 6> value{};  // u_s, nu_z, P, rho, T, E
  std::array<double, 6> stddev{};
  bool has_stddev = false;  // std columns present and positive
};

using Dataset = std::vector<ShockObservation>;

}  // namespace shockgp
