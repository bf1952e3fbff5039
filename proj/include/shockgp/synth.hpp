#pragma once

// Synthetic three-regime Hugoniot data and matching step profiles.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "shockgp/extract.hpp"
#include "shockgp/hugoniot.hpp"
#include "shockgp/observation.hpp"

namespace shockgp {

/// u_s = c0 + s * u_p
struct LinearBranch {
  double c0 = 0.0;
  double s = 0.0;
  double operator()(double up) const { return c0 + s * up; }
};

/// Lead particle velocity falls below u_p by amp * sin^2 across [lo, hi].
struct VelocityDip {
  double lo = 0.0, hi = 0.0, amp = 0.0;
  double operator()(double up) const;
};

struct SynthConfig {
  RegionState ambient{0.0, 0.0, 3.215, 300.0, 0.0};
  LinearBranch elastic{12.0, 0.5};
  LinearBranch plastic{8.4, 2.0};
  LinearBranch phase{6.2, 2.5};
  double plastic_onset = 1.25;      // first u_p with a trailing plastic wave
  double plastic_threshold = 2.25;  // last u_p where the lead is elastic
  double pt_onset = 3.0;
  double pt_threshold = 4.25;
  VelocityDip dip_elastic{1.125, 2.375, 0.3};
  VelocityDip dip_plastic{2.875, 4.375, 0.5};
  double t_intercept = 300.0;
  double t_slope = 250.0;
  double noise_frac = 0.01;  // 1-sigma, relative to each true value
  double up_min = 0.25, up_max = 6.0, up_step = 0.25;
};

struct TruthRow {
  double u_p = 0.0;
  WaveLabel wave = WaveLabel::Lead;
  double u_s = 0.0;
  RegionState upstream;
  RegionState state;
};

/// Waves present at one piston velocity, lead first.
std::vector<TruthRow> synth_truth(const SynthConfig& cfg, double up);

std::vector<double> synth_grid(const SynthConfig& cfg);

ShockObservation truth_to_observation(const TruthRow& t, double noise_frac);

/// Independent Gaussian noise of noise_frac * |value| on every output; std
/// columns carry the same level.
Dataset synth_observations(const SynthConfig& cfg, std::span<const double> up, std::uint64_t seed);

struct ProfileSpec {
  double bin_width = 2.0;  // nm
  double t_first = 20.0;   // ps
  double t_last = 60.0;
  int frames = 9;
  double noise_frac = 0.0;
  double length_factor = 1.15;  // domain length / lead front distance at t_last
  // Frames start late enough for the narrowest region between two fronts to
  // span this many bins; the window length t_last - t_first is kept. 0 disables.
  double min_region_bins = 20.0;
};

/// Time window actually used for a set of waves.
std::pair<double, double> profile_window(std::span<const TruthRow> waves, const ProfileSpec& spec);

/// Step profiles for fronts x_k = u_s_k t travelling into the ambient state.
ProfileSeries synth_profiles(const RegionState& ambient, std::span<const TruthRow> waves,
                             const ProfileSpec& spec, std::uint64_t seed);

}  // namespace shockgp
