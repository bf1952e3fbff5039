#include "shockgp/waves.hpp"

#include <algorithm>
#include <cmath>

#include "shockgp/errors.hpp"

namespace shockgp {

namespace {

int idx(WaveLabel w) { return static_cast<int>(w); }

double threshold_for(WaveLabel w, const WaveConfig& cfg) {
  switch (w) {
    case WaveLabel::Plastic: return cfg.plastic_threshold;
    case WaveLabel::PhaseTransformation: return cfg.pt_threshold;
    default: return -INFINITY;
  }
}

WaveLabel previous(WaveLabel w) {
  return w == WaveLabel::PhaseTransformation ? WaveLabel::Plastic : WaveLabel::Lead;
}

}  // namespace

Partition partition_dataset(const Dataset& rows, const WaveConfig& cfg) {
  Partition p;
  for (const auto& r : rows) {
    switch (r.wave) {
      case WaveLabel::Lead:
        p.sets[idx(WaveLabel::Lead)].push_back({r, false});
        if (r.u_p > cfg.plastic_threshold) p.sets[idx(WaveLabel::Plastic)].push_back({r, false});
        if (r.u_p > cfg.pt_threshold) {
          p.sets[idx(WaveLabel::PhaseTransformation)].push_back({r, false});
        }
        break;
      case WaveLabel::Plastic: p.sets[idx(WaveLabel::Plastic)].push_back({r, true}); break;
      case WaveLabel::PhaseTransformation:
        p.sets[idx(WaveLabel::PhaseTransformation)].push_back({r, true});
        break;
    }
  }
  for (auto& s : p.sets) {
    std::stable_sort(s.begin(), s.end(),
                     [](const PartitionRow& a, const PartitionRow& b) { return a.obs.u_p < b.obs.u_p; });
  }
  return p;
}

double WaveModels::onset(WaveLabel w) const {
  const auto u = at(w).inputs();
  return *std::min_element(u.begin(), u.end());
}

std::vector<RegionState> upstream_states(const WaveModels& models, WaveLabel w,
                                          std::span<const double> up) {
  const RegionState& amb = models.config.ambient;
  std::vector<RegionState> out(up.size(), amb);
  if (w == WaveLabel::Lead) return out;

  const WaveLabel prev = previous(w);
  const double thr = threshold_for(w, models.config);
  std::vector<double> behind;
  std::vector<std::size_t> where;
  for (std::size_t j = 0; j < up.size(); ++j) {
    if (up[j] <= thr) {
      behind.push_back(up[j]);
      where.push_back(j);
    }
  }
  if (behind.empty()) return out;
  if (!models.has(prev)) {
    throw Error(ErrorKind::EmptyRegime,
                std::string(to_string(prev)) + " model needed for the state ahead of " +
                    std::string(to_string(w)));
  }
  const std::vector<RegionState> prev_up = upstream_states(models, prev, behind);
  const PosteriorPrediction pp = predict(models.at(prev), behind, prev_up);
  for (std::size_t i = 0; i < where.size(); ++i) {
    out[where[i]] = pp.state_at(static_cast<Eigen::Index>(i), models.at(prev).temp);
  }
  return out;
}

WaveModels train_sequence(const Dataset& rows, const WaveConfig& cfg) {
  WaveModels wm;
  wm.config = cfg;
  const Partition part = partition_dataset(rows, cfg);

  for (WaveLabel w : kWaveOrder) {
    const int i = idx(w);
    const auto& set = part.sets[i];
    if (set.size() < kMinRegimeRows) {
      wm.status[i] = "EmptyRegime: " + std::string(to_string(w)) + " has " +
                     std::to_string(set.size()) + " rows";
      if (w == WaveLabel::Lead) throw Error(ErrorKind::EmptyRegime, wm.status[i]);
      continue;
    }
    if (w != WaveLabel::Lead && !wm.has(previous(w))) {
      wm.status[i] = "EmptyRegime: " + std::string(to_string(previous(w))) +
                     " model missing, cannot chain " + std::string(to_string(w));
      continue;
    }

    // Trailing rows take the previous model's posterior mean as the state
    // ahead of the front; leading rows see ambient material.
    std::vector<double> trail_up;
    for (const auto& r : set)
      if (r.trailing) trail_up.push_back(r.obs.u_p);
    std::vector<RegionState> trail_state;
    if (!trail_up.empty()) {
      const WaveLabel prev = previous(w);
      const PosteriorPrediction pp =
          predict(wm.at(prev), trail_up, upstream_states(wm, prev, trail_up));
      for (Eigen::Index j = 0; j < pp.size(); ++j)
        trail_state.push_back(pp.state_at(j, wm.at(prev).temp));
    }

    std::vector<TrainingRow> tr;
    std::size_t t = 0;
    for (const auto& r : set) tr.push_back({r.obs, r.trailing ? trail_state[t++] : cfg.ambient});
    wm.upstream[i].clear();
    for (const auto& r : tr) wm.upstream[i].push_back(r.upstream);

    GpConfig g = cfg.gp;
    g.seed = cfg.gp.seed + static_cast<std::uint64_t>(i);
    try {
      wm.model[i] = train(tr, g);
      wm.status[i] = "ok";
    } catch (const Error& e) {
      if (w == WaveLabel::Lead) throw;
      wm.status[i] = e.what();
    }
  }
  return wm;
}

WavePredictions predict_all(const WaveModels& models, std::span<const double> up) {
  WavePredictions out;
  for (WaveLabel w : kWaveOrder) {
    if (!models.has(w)) continue;
    std::vector<double> sub;
    const double lo = w == WaveLabel::Lead ? -INFINITY : models.onset(w);
    for (double u : up)
      if (u >= lo) sub.push_back(u);
    out.wave[idx(w)] = predict(models.at(w), sub, upstream_states(models, w, sub));
  }
  return out;
}

Ellipse ellipse_from_cov(double cx, double cy, double var_x, double var_y, double cov_xy,
                         double n_std) {
  Ellipse e{cx, cy, var_x, var_y, cov_xy};
  // Closed-form symmetric 2x2 eigen-decomposition.
  const double tr = 0.5 * (var_x + var_y);
  const double dd = 0.5 * (var_x - var_y);
  const double r = std::hypot(dd, cov_xy);
  const double l1 = std::max(tr + r, 0.0), l2 = std::max(tr - r, 0.0);
  e.semi_major = n_std * std::sqrt(l1);
  e.semi_minor = n_std * std::sqrt(l2);
  e.angle = 0.5 * std::atan2(2.0 * cov_xy, var_x - var_y);
  return e;
}

std::vector<LocusPoint> hugoniot_locus(const WaveModels& models, std::span<const double> up) {
  const WavePredictions wp = predict_all(models, up);
  std::vector<LocusPoint> out;
  for (WaveLabel w : kWaveOrder) {
    const auto& p = wp.wave[idx(w)];
    if (!p) continue;
    for (Eigen::Index j = 0; j < p->size(); ++j) {
      const auto m = p->point_mean(j);
      const auto c = p->point_block(j);
      LocusPoint lp;
      lp.wave = w;
      lp.u_p = p->u_p[j];
      lp.rho_P = ellipse_from_cov(m(3), m(2), c(3, 3), c(2, 2), c(3, 2));
      lp.rho_T = ellipse_from_cov(m(3), m(4), c(3, 3), c(4, 4), c(3, 4));
      out.push_back(lp);
    }
  }
  return out;
}

}  // namespace shockgp
