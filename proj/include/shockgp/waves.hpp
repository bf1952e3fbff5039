#pragma once

// Lead / plastic / phase-transformation models trained in sequence, each
// trailing model taking the state ahead of its front from the previous one.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shockgp/gp.hpp"
#include "shockgp/observation.hpp"

namespace shockgp {

inline constexpr int kWaves = 3;
inline constexpr std::array<WaveLabel, kWaves> kWaveOrder = {WaveLabel::Lead, WaveLabel::Plastic,
                                                             WaveLabel::PhaseTransformation};
inline constexpr std::size_t kMinRegimeRows = 3;

struct WaveConfig {
  double plastic_threshold = 2.25;  // lead rows above this also train the plastic model
  double pt_threshold = 4.25;       // lead rows above this also train the transformation model
  RegionState ambient{0.0, 0.0, 3.215, 300.0, 0.0};
  GpConfig gp{};
};

/// A row of a regime's training set and whether its front trails another wave.
struct PartitionRow {
  ShockObservation obs;
  bool trailing = false;
};

struct Partition {
  std::array<std::vector<PartitionRow>, kWaves> sets;
  const std::vector<PartitionRow>& operator[](WaveLabel w) const {
    return sets[static_cast<int>(w)];
  }
};

Partition partition_dataset(const Dataset& rows, const WaveConfig& cfg);

struct WaveModels {
  std::array<std::optional<TrainedModel>, kWaves> model;
  std::array<std::string, kWaves> status;  // "ok" or the failure reason
  std::array<std::vector<RegionState>, kWaves> upstream;  // per training row
  WaveConfig config;

  bool has(WaveLabel w) const { return model[static_cast<int>(w)].has_value(); }
  const TrainedModel& at(WaveLabel w) const { return *model[static_cast<int>(w)]; }
  /// Smallest training u_p of the regime; trailing models predict from here up.
  double onset(WaveLabel w) const;
};

/// Throws EmptyRegime when the lead set is too small; later regimes that
/// cannot be trained are left empty with their reason in status.
WaveModels train_sequence(const Dataset& rows, const WaveConfig& cfg);

/// State ahead of wave w at each u (ambient, or the previous model's
/// posterior mean when u is at or below the regime threshold).
std::vector<RegionState> upstream_states(const WaveModels& models, WaveLabel w,
                                          std::span<const double> up);

struct WavePredictions {
  std::array<std::optional<PosteriorPrediction>, kWaves> wave;
};

WavePredictions predict_all(const WaveModels& models, std::span<const double> up);

/// +-n_std contour of a 2D Gaussian.
struct Ellipse {
  double cx = 0.0, cy = 0.0;
  double var_x = 0.0, var_y = 0.0, cov_xy = 0.0;
  double semi_major = 0.0, semi_minor = 0.0;
  double angle = 0.0;  // radians, major axis from +x
};

Ellipse ellipse_from_cov(double cx, double cy, double var_x, double var_y, double cov_xy,
                         double n_std = 2.0);

struct LocusPoint {
  WaveLabel wave = WaveLabel::Lead;
  double u_p = 0.0;
  Ellipse rho_P;  // x = rho, y = P
  Ellipse rho_T;  // x = rho, y = T
};

std::vector<LocusPoint> hugoniot_locus(const WaveModels& models, std::span<const double> up);

}  // namespace shockgp
