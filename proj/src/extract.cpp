#include "shockgp/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "shockgp/errors.hpp"
#include "shockgp/moments.hpp"

namespace shockgp {

double estimate_noise(std::span<const double> v) {
  if (v.size() < 3) return 0.0;
  std::vector<double> d(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = std::abs(v[i + 1] - v[i]);
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  // MAD of a difference of two iid normals, back to one sample's sigma.
  return *mid / (0.6744897501960817 * std::sqrt(2.0));
}

std::vector<int> cluster_values(std::span<const double> v, double eps, std::size_t min_pts) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  // Neighbour counts by sliding window over sorted values.
  std::vector<char> core(n, 0);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = v[order[i]];
    while (v[order[lo]] < x - eps) ++lo;
    if (hi < i) hi = i;
    while (hi + 1 < n && v[order[hi + 1]] <= x + eps) ++hi;
    core[i] = (hi - lo + 1) >= min_pts;
  }

  std::vector<int> lab_sorted(n, -1);
  int next = -1;
  std::ptrdiff_t last_core = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    if (last_core < 0 || v[order[i]] - v[order[static_cast<std::size_t>(last_core)]] > eps) ++next;
    lab_sorted[i] = next;
    last_core = static_cast<std::ptrdiff_t>(i);
  }
  // Border points join the nearest core point within eps.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = eps;
    int lab = -1;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 1; j >= 0; --j) {
      const double d = v[order[i]] - v[order[j]];
      if (d > eps) break;
      if (core[j] && d <= best) {
        best = d;
        lab = lab_sorted[j];
        break;
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = v[order[j]] - v[order[i]];
      if (d > eps) break;
      if (core[j]) {
        if (d < best || lab < 0) lab = lab_sorted[j];
        break;
      }
    }
    lab_sorted[i] = lab;
  }

  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) labels[order[i]] = lab_sorted[i];
  return labels;
}

namespace {

struct Run {
  int label;
  std::size_t first, last;
};

}  // namespace

std::vector<PlateauSegment> segment_plateaus(const ProfileFrame& frame, const SegmentParams& p) {
  const std::size_t n = frame.value.size();
  if (frame.x.size() != n) throw Error(ErrorKind::InvalidArgument, "positions and values differ in length");
  if (n < 2 * p.min_cluster_size) {
    throw Error(ErrorKind::InvalidArgument, "profile has fewer than 2 * min_cluster_size bins");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(frame.x[i] > frame.x[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "bin positions must increase strictly");
    }
  }

  const auto [vmin, vmax] = std::minmax_element(frame.value.begin(), frame.value.end());
  const double noise = estimate_noise(frame.value);
  const double eps = std::max(p.noise_multiplier * noise,
                              p.eps_floor_rel * (*vmax - *vmin) + p.eps_floor_abs);
  const std::vector<int> lab = cluster_values(frame.value, eps, p.min_cluster_size);

  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[i] < 0) continue;
    if (!runs.empty() && runs.back().label == lab[i] && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({lab[i], i, i});
    }
  }
  // Islands no longer than the merge gap are noise.
  std::erase_if(runs, [&](const Run& r) { return r.last - r.first + 1 <= p.merge_gap; });
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && merged.back().label == r.label &&
        r.first - merged.back().last - 1 <= p.merge_gap) {
      merged.back().last = r.last;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<PlateauSegment> out;
  for (const Run& r : merged) {
    double s = 0.0, ss = 0.0;
    std::size_t c = 0;
    for (std::size_t i = r.first; i <= r.last; ++i) {
      if (lab[i] != r.label) continue;
      s += frame.value[i];
      ++c;
    }
    if (c < p.min_cluster_size) continue;
    const double m = s / static_cast<double>(c);
    for (std::size_t i = r.first; i <= r.last; ++i)
      if (lab[i] == r.label) ss += (frame.value[i] - m) * (frame.value[i] - m);
    PlateauSegment seg;
    seg.first_bin = r.first;
    seg.last_bin = r.last;
    seg.start = frame.x[r.first];
    seg.end = frame.x[r.last];
    seg.mean = m;
    seg.stddev = c > 1 ? std::sqrt(ss / static_cast<double>(c - 1)) : 0.0;
    seg.count = c;
    out.push_back(seg);
  }
  if (out.empty()) throw Error(ErrorKind::NoPlateaus, "no plateau survived clustering");
  return out;
}

std::vector<double> front_positions(std::span<const PlateauSegment> segs) {
  std::vector<double> f;
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) f.push_back(0.5 * (segs[i].end + segs[i + 1].start));
  return f;
}

double FrontTrack::stderr_total() const { return std::hypot(slope_stderr, quantization_stderr); }

FrontTrack fit_shock_speed(std::span<const double> t, std::span<const double> x, double bin_width) {
  if (t.size() != x.size()) throw Error(ErrorKind::InvalidArgument, "times and positions differ in length");
  if (t.size() < 2) throw Error(ErrorKind::InsufficientData, "speed fit needs >= 2 samples");
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double stt = 0.0, stx = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stx += (t[i] - mt) * (x[i] - mx);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(stt > 0.0)) throw Error(ErrorKind::DegenerateTimes, "all sample times are equal");
  FrontTrack tr;
  tr.t.assign(t.begin(), t.end());
  tr.x.assign(x.begin(), x.end());
  tr.u_s = stx / stt;
  tr.intercept = mx - tr.u_s * mt;
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = x[i] - (tr.intercept + tr.u_s * t[i]);
    ssr += r * r;
  }
  tr.r2 = sxx > 0.0 ? std::clamp(1.0 - ssr / sxx, 0.0, 1.0) : 1.0;
  tr.slope_stderr = t.size() > 2 ? std::sqrt(ssr / (n - 2.0) / stt) : 0.0;
  if (bin_width > 0.0) {
    double sabs = 0.0;
    for (double ti : t) sabs += std::abs(ti - mt);
    tr.quantization_stderr = 0.5 * bin_width * sabs / stt / std::sqrt(3.0);
  }
  return tr;
}

std::vector<RegionAverage> state_averages(
    const std::array<std::vector<PlateauSegment>, kProperties>& segs) {
  const std::size_t R = segs[0].size();
  for (int q = 1; q < kProperties; ++q) {
    if (segs[q].size() != R) {
      throw Error(ErrorKind::MisalignedSegments,
                  "property profiles disagree on region count (" + std::to_string(R) + " vs " +
                      std::to_string(segs[q].size()) + ")");
    }
  }
  std::vector<RegionAverage> out(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto& a = out[r];
    a.mean = {segs[kPropVz][r].mean, segs[kPropP][r].mean, segs[kPropRho][r].mean,
              segs[kPropT][r].mean, segs[kPropE][r].mean};
    a.stddev = {segs[kPropVz][r].stddev, segs[kPropP][r].stddev, segs[kPropRho][r].stddev,
                segs[kPropT][r].stddev, segs[kPropE][r].stddev};
    a.count = segs[kPropRho][r].count;
  }
  return out;
}

double mass_speed_std(const RegionState& pre, const RegionState& post, const RegionState& pre_std,
                      const RegionState& post_std) {
  const double D = post.rho - pre.rho;
  const double us = us_from_mass_conservation(pre, post);
  const std::array<double, 4> g = {(post.nu_z - us) / D, post.rho / D, (us - pre.nu_z) / D,
                                   -pre.rho / D};
  const std::array<double, 4> s = {post_std.rho, post_std.nu_z, pre_std.rho, pre_std.nu_z};
  return std::sqrt(propagate_independent(g, s));
}

double momentum_speed_std(const RegionState& pre, const RegionState& post,
                          const RegionState& pre_std, const RegionState& post_std) {
  const double dv = post.nu_z - pre.nu_z;
  const double dP = post.P - pre.P;
  const double r = kGPaPerDensityVelocitySquared * pre.rho;
  const std::array<double, 5> g = {1.0 / (r * dv), -1.0 / (r * dv), -dP / (r * pre.rho * dv),
                                   -dP / (r * dv * dv), 1.0 + dP / (r * dv * dv)};
  const std::array<double, 5> s = {post_std.P, pre_std.P, pre_std.rho, post_std.nu_z, pre_std.nu_z};
  return std::sqrt(propagate_independent(g, s));
}

JumpCheck validate_jump(const RegionState& pre, const RegionState& post,
                        const RegionState& pre_std, const RegionState& post_std, double us_fit,
                        double us_fit_std, double k) {
  JumpCheck c;
  c.us_mass = us_from_mass_conservation(pre, post);
  c.us_momentum = us_from_momentum_conservation(pre, post);
  const double sm = mass_speed_std(pre, post, pre_std, post_std);
  const double sp = momentum_speed_std(pre, post, pre_std, post_std);
  c.us_mass_std = std::sqrt(sm * sm + us_fit_std * us_fit_std);
  c.us_momentum_std = std::sqrt(sp * sp + us_fit_std * us_fit_std);
  c.residual_mass = std::abs(us_fit - c.us_mass);
  c.residual_momentum = std::abs(us_fit - c.us_momentum);
  // Rounding slack so exact states pass with zero spread.
  const double slack = 1e-9 * std::max(1.0, std::abs(us_fit));
  c.pass_mass = c.residual_mass <= k * c.us_mass_std + slack;
  c.pass_momentum = c.residual_momentum <= k * c.us_momentum_std + slack;
  return c;
}

namespace {

struct Pool {
  double n = 0.0, sum = 0.0, m2 = 0.0;  // Chan et al. pairwise combination
  double mean = 0.0;
  void add(double cnt, double m, double sd) {
    if (cnt <= 0) return;
    const double tot = n + cnt;
    const double d = m - mean;
    mean += d * cnt / tot;
    m2 += sd * sd * (cnt - 1.0) + d * d * n * cnt / tot;
    n = tot;
  }
  double stddev() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0)) : 0.0; }
};

}  // namespace

ExtractResult extract_simulation(const ProfileSeries& series, double u_p, const ExtractConfig& cfg) {
  ExtractResult res;
  const std::size_t F = series.frames[0].size();
  for (int q = 0; q < kProperties; ++q) {
    if (series.frames[q].size() != F) {
      throw Error(ErrorKind::MalformedInput, "property files have different frame counts");
    }
  }
  if (F < 2) throw Error(ErrorKind::InsufficientData, "need >= 2 profile frames");

  struct FrameData {
    double time;
    std::array<std::vector<PlateauSegment>, kProperties> segs;
    std::vector<RegionAverage> regions;
    std::vector<double> fronts;
  };
  std::vector<FrameData> ok;
  for (std::size_t f = 0; f < F; ++f) {
    const double t = series.frames[0][f].time;
    for (int q = 1; q < kProperties; ++q) {
      if (series.frames[q][f].time != t || series.frames[q][f].x != series.frames[0][f].x) {
        throw Error(ErrorKind::MalformedInput, "property frames are not aligned on (time, bin)");
      }
    }
    FrameData fd;
    fd.time = t;
    try {
      for (int q = 0; q < kProperties; ++q) fd.segs[q] = segment_plateaus(series.frames[q][f], cfg.seg);
      fd.regions = state_averages(fd.segs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MisalignedSegments && e.kind() != ErrorKind::NoPlateaus) throw;
      res.warnings.push_back("frame t=" + std::to_string(t) + " skipped: " + e.what());
      continue;
    }
    fd.fronts = front_positions(fd.segs[cfg.reference]);
    ok.push_back(std::move(fd));
  }

  std::map<std::size_t, std::size_t> counts;
  for (const auto& fd : ok) ++counts[fd.regions.size()];
  std::size_t modal = 0, best = 0;
  for (const auto& [r, c] : counts) {
    if (c > best) {
      best = c;
      modal = r;
    }
  }
  std::vector<const FrameData*> used;
  for (const auto& fd : ok) {
    if (fd.regions.size() == modal) {
      used.push_back(&fd);
    } else {
      res.warnings.push_back("frame t=" + std::to_string(fd.time) + " skipped: " +
                             std::to_string(fd.regions.size()) + " regions, expected " +
                             std::to_string(modal));
    }
  }
  if (modal < 2) throw Error(ErrorKind::NoDensityJump, "no shock front found in the profiles");
  if (used.size() < 2) throw Error(ErrorKind::InsufficientData, "fewer than 2 usable frames");
  res.frames_used = used.size();
  const auto& x0 = series.frames[cfg.reference][0].x;
  const double bin_width = x0.size() > 1 ? (x0.back() - x0.front()) / static_cast<double>(x0.size() - 1) : 0.0;

  // Region statistics pooled across frames.
  const std::size_t R = modal;
  std::vector<std::array<Pool, kProperties>> pool(R);
  for (const FrameData* fd : used)
    for (std::size_t r = 0; r < R; ++r)
      for (int q = 0; q < kProperties; ++q) {
        const auto& s = fd->segs[q][r];
        pool[r][q].add(static_cast<double>(s.count), s.mean, s.stddev);
      }
  std::vector<RegionAverage> regions(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto& a = regions[r];
    a.mean = {pool[r][kPropVz].mean, pool[r][kPropP].mean, pool[r][kPropRho].mean,
              pool[r][kPropT].mean, pool[r][kPropE].mean};
    a.stddev = {pool[r][kPropVz].stddev(), pool[r][kPropP].stddev(), pool[r][kPropRho].stddev(),
                pool[r][kPropT].stddev(), pool[r][kPropE].stddev()};
    a.count = static_cast<std::size_t>(pool[r][kPropRho].n);
  }

  // Fronts from the right: wave w sits between regions R-2-w and R-1-w.
  for (std::size_t w = 0; w + 1 < R; ++w) {
    const std::size_t fi = R - 2 - w;
    std::vector<double> t, x;
    for (const FrameData* fd : used) {
      t.push_back(fd->time);
      x.push_back(fd->fronts[fi]);
    }
    ExtractedWave ew;
    ew.track = fit_shock_speed(t, x, bin_width);
    ew.upstream = regions[fi + 1];
    ew.downstream = regions[fi];
    ew.check = validate_jump(ew.upstream.mean, ew.downstream.mean, ew.upstream.stddev,
                             ew.downstream.stddev, ew.track.u_s, ew.track.stderr_total(), cfg.k_sigma);

    auto& o = ew.obs;
    o.u_p = u_p;
    o.wave = w == 0   ? WaveLabel::Lead
             : w == 1 ? (u_p <= cfg.plastic_threshold ? WaveLabel::Plastic
                                                      : WaveLabel::PhaseTransformation)
                      : WaveLabel::PhaseTransformation;
    const RegionState& d = ew.downstream.mean;
    const RegionState& ds = ew.downstream.stddev;
    o.value = {ew.track.u_s, d.nu_z, d.P, d.rho, d.T, d.E};
    o.stddev = {ew.track.stderr_total(), ds.nu_z, ds.P, ds.rho, ds.T, ds.E};
    o.has_stddev = std::all_of(o.stddev.begin(), o.stddev.end(), [](double s) { return s > 0.0; });
    res.waves.push_back(std::move(ew));
  }
  return res;
}

}  // namespace shockgp
