#pragma once

// Plateau segmentation of binned shock profiles, front tracking, per-region
// state averages and jump-condition validation.
//
// Geometry: the shock travels toward +x into material at rest; the unshocked
// region is the rightmost plateau and the lead front the rightmost front.
// Positions are in nm and times in ps, so nm/ps reads directly as km/s.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shockgp/hugoniot.hpp"
#include "shockgp/observation.hpp"

namespace shockgp {

struct ProfileFrame {
  double time = 0.0;  // ps
  std::vector<double> x;
  std::vector<double> value;
};

struct SegmentParams {
  std::size_t min_cluster_size = 10;  // bins
  double noise_multiplier = 3.0;      // eps = max(noise_multiplier * noise, floor)
  double eps_floor_rel = 1e-3;        // floor relative to the value range
  double eps_floor_abs = 1e-12;
  std::size_t merge_gap = 2;  // noise bins tolerated inside one run
};

struct PlateauSegment {
  double start = 0.0, end = 0.0;  // bin-center positions of the first and last member
  std::size_t first_bin = 0, last_bin = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Robust noise level from first differences in spatial order.
double estimate_noise(std::span<const double> v);

/// 1D density-based clustering in value space. Returns one label per value,
/// -1 for noise.
std::vector<int> cluster_values(std::span<const double> v, double eps, std::size_t min_pts);

std::vector<PlateauSegment> segment_plateaus(const ProfileFrame& frame, const SegmentParams& p = {});

/// Midpoints between consecutive segments.
std::vector<double> front_positions(std::span<const PlateauSegment> segs);

struct FrontTrack {
  std::vector<double> t;
  std::vector<double> x;
  double u_s = 0.0;  // km/s
  double intercept = 0.0;
  double r2 = 1.0;
  double slope_stderr = 0.0;        // from the fit residuals
  double quantization_stderr = 0.0;  // from locating fronts only to +-bin_width/2

  double stderr_total() const;
};

/// Least-squares front track. With bin_width > 0 the slope error also
/// carries the bin quantization of the positions: its worst case over
/// errors bounded by bin_width/2, read as a uniform spread.
FrontTrack fit_shock_speed(std::span<const double> t, std::span<const double> x,
                           double bin_width = 0.0);

/// Property order used by the averaging step.
enum PropertyIndex : int { kPropVz = 0, kPropP = 1, kPropRho = 2, kPropT = 3, kPropE = 4 };
inline constexpr int kProperties = 5;

struct RegionAverage {
  RegionState mean;
  RegionState stddev;
  std::size_t count = 0;
};

/// Per-region means and std devs from each property's own segments, ordered
/// by position. Throws MisalignedSegments when region counts disagree.
std::vector<RegionAverage> state_averages(
    const std::array<std::vector<PlateauSegment>, kProperties>& segs);

struct JumpCheck {
  double us_mass = 0.0, us_mass_std = 0.0;
  double us_momentum = 0.0, us_momentum_std = 0.0;
  double residual_mass = 0.0, residual_momentum = 0.0;
  bool pass_mass = false, pass_momentum = false;
  bool pass() const { return pass_mass && pass_momentum; }
};

/// Compares the fitted shock speed with the speeds implied by mass and
/// momentum conservation. Std devs propagate to first order, plus the fit's
/// own standard error.
JumpCheck validate_jump(const RegionState& pre, const RegionState& post,
                        const RegionState& pre_std, const RegionState& post_std, double us_fit,
                        double us_fit_std, double k = 2.0);

/// First-order std of the mass-conservation shock speed.
double mass_speed_std(const RegionState& pre, const RegionState& post, const RegionState& pre_std,
                      const RegionState& post_std);
double momentum_speed_std(const RegionState& pre, const RegionState& post,
                          const RegionState& pre_std, const RegionState& post_std);

/// All five property profiles of one simulation, frames aligned on
/// (time, bin center).
struct ProfileSeries {
  std::array<std::vector<ProfileFrame>, kProperties> frames;
};

struct ExtractConfig {
  SegmentParams seg{};
  int reference = kPropRho;  // property defining fronts
  double k_sigma = 2.0;
  double plastic_threshold = 2.25;  // trailing wave above this u_p is a phase transformation
};

struct ExtractedWave {
  ShockObservation obs;
  FrontTrack track;
  JumpCheck check;
  RegionAverage upstream, downstream;
};

struct ExtractResult {
  std::vector<ExtractedWave> waves;  // lead first
  std::vector<std::string> warnings;
  std::size_t frames_used = 0;
};

/// Full workflow for one simulation at piston velocity u_p.
ExtractResult extract_simulation(const ProfileSeries& series, double u_p, const ExtractConfig& cfg = {});

}  // namespace shockgp
