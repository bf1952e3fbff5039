#include "shockgp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "shockgp/errors.hpp"

namespace shockgp {

double VelocityDip::operator()(double up) const {
  if (!(hi > lo) || up <= lo || up >= hi) return 0.0;
  const double s = std::sin(std::numbers::pi * (up - lo) / (hi - lo));
  return amp * s * s;
}

std::vector<TruthRow> synth_truth(const SynthConfig& cfg, double up) {
  std::vector<TruthRow> rows;
  const RegionState& amb = cfg.ambient;

  TruthRow lead;
  lead.u_p = up;
  lead.wave = WaveLabel::Lead;
  lead.upstream = amb;
  double vz = up;
  if (up <= cfg.plastic_threshold) {
    lead.u_s = cfg.elastic(up);
    vz -= cfg.dip_elastic(up);
  } else if (up <= cfg.pt_threshold) {
    lead.u_s = cfg.plastic(up);
    vz -= cfg.dip_plastic(up);
  } else {
    lead.u_s = cfg.phase(up);
  }
  lead.state = jump_state(amb, {lead.u_s, vz}, cfg.t_intercept, cfg.t_slope);
  rows.push_back(lead);

  auto trailing = [&](WaveLabel w, const LinearBranch& br) {
    TruthRow t;
    t.u_p = up;
    t.wave = w;
    t.u_s = br(up);
    t.upstream = lead.state;
    t.state = jump_state(lead.state, {t.u_s, up}, cfg.t_intercept, cfg.t_slope);
    rows.push_back(t);
  };
  if (up >= cfg.plastic_onset && up <= cfg.plastic_threshold) trailing(WaveLabel::Plastic, cfg.plastic);
  if (up >= cfg.pt_onset && up <= cfg.pt_threshold) trailing(WaveLabel::PhaseTransformation, cfg.phase);
  return rows;
}

std::vector<double> synth_grid(const SynthConfig& cfg) {
  if (!(cfg.up_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((cfg.up_max - cfg.up_min) / cfg.up_step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) g.push_back(cfg.up_min + cfg.up_step * i);
  return g;
}

ShockObservation truth_to_observation(const TruthRow& t, double noise_frac) {
  ShockObservation o;
  o.u_p = t.u_p;
  o.wave = t.wave;
  o.value = {t.u_s, t.state.nu_z, t.state.P, t.state.rho, t.state.T, t.state.E};
  for (int c = 0; c < 6; ++c) o.stddev[c] = noise_frac * std::abs(o.value[c]);
  o.has_stddev = noise_frac > 0.0;
  return o;
}

Dataset synth_observations(const SynthConfig& cfg, std::span<const double> up, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset out;
  for (double u : up) {
    for (const TruthRow& t : synth_truth(cfg, u)) {
      ShockObservation o = truth_to_observation(t, cfg.noise_frac);
      for (int c = 0; c < 6; ++c) o.value[c] += o.stddev[c] * gauss(rng);
      out.push_back(o);
    }
  }
  return out;
}

std::pair<double, double> profile_window(std::span<const TruthRow> waves, const ProfileSpec& spec) {
  double t0 = spec.t_first;
  if (spec.min_region_bins > 0.0) {
    for (std::size_t k = 1; k < waves.size(); ++k) {
      const double gap = waves[k - 1].u_s - waves[k].u_s;
      if (gap > 0.0) t0 = std::max(t0, spec.min_region_bins * spec.bin_width / gap);
    }
  }
  return {t0, t0 + (spec.t_last - spec.t_first)};
}

ProfileSeries synth_profiles(const RegionState& ambient, std::span<const TruthRow> waves,
                             const ProfileSpec& spec, std::uint64_t seed) {
  if (waves.empty()) throw Error(ErrorKind::InvalidArgument, "at least one wave is required");
  if (spec.frames < 2 || !(spec.t_last > spec.t_first) || !(spec.bin_width > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "bad profile timing or binning");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto [t_first, t_last] = profile_window(waves, spec);
  const double length = spec.length_factor * waves[0].u_s * t_last;
  const int nbins = static_cast<int>(std::ceil(length / spec.bin_width));

  ProfileSeries s;
  for (int f = 0; f < spec.frames; ++f) {
    const double t = t_first + (t_last - t_first) * f / (spec.frames - 1);
    std::array<ProfileFrame, kProperties> fr;
    for (auto& p : fr) p.time = t;
    for (int i = 0; i < nbins; ++i) {
      const double x = (i + 0.5) * spec.bin_width;
      // Walk fronts from the lead inward.
      const RegionState* st = &ambient;
      for (const auto& w : waves) {
        if (x <= w.u_s * t) st = &w.state;
      }
      const std::array<double, kProperties> v = {st->nu_z, st->P, st->rho, st->T, st->E};
      for (int q = 0; q < kProperties; ++q) {
        fr[q].x.push_back(x);
        fr[q].value.push_back(v[q] + spec.noise_frac * std::abs(v[q]) * gauss(rng));
      }
    }
    for (int q = 0; q < kProperties; ++q) s.frames[q].push_back(std::move(fr[q]));
  }
  return s;
}

}  // namespace shockgp
