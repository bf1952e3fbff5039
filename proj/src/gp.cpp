#include "shockgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "shockgp/errors.hpp"

namespace shockgp {

namespace {

constexpr int kBaseParams = 4;
constexpr int kNoiseParams = kOutputs;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kMaxAtanh = std::atanh(0.999);

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::pair<double, double> ols(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

}  // namespace

MeanFunction fit_mean_function(std::span<const double> up, std::span<const double> us,
                               std::span<const double> vz) {
  if (up.size() != us.size() || up.size() != vz.size()) {
    throw Error(ErrorKind::InvalidArgument, "mean function inputs differ in length");
  }
  if (up.size() < 2) throw Error(ErrorKind::InsufficientData, "mean function needs >= 2 points");
  MeanFunction mf;
  std::tie(mf.us0, mf.us1) = ols(up, us);
  std::tie(mf.vz0, mf.vz1) = ols(up, vz);
  return mf;
}

ExpansionPoint expansion_at(const MeanFunction& mf, double up, const RegionState& upstream) {
  return {upstream, mf.us(up), mf.vz(up)};
}

Eigen::VectorXd prior_mean(std::span<const DesignPoint> pts, const Hyperparameters& theta,
                           const TemperatureModel& temp) {
  const Eigen::Index N = static_cast<Eigen::Index>(pts.size());
  const Eigen::Matrix2d B = coreg_matrix(theta);
  Eigen::VectorXd mu(kOutputs * N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const ExpansionPoint& x = pts[j].x;
    const FrontMoments fm{x.mean_us, x.mean_vz, B(0, 0), B(1, 1), B(0, 1)};
    mu(j) = x.mean_us;
    mu(N + j) = x.mean_vz;
    for (int l = 2; l < kOutputs; ++l) {
      mu(l * N + j) =
          output_scale(l, theta.s1, theta.s2) * delta_mean(kStateOrder[l], x.upstream, fm, temp);
    }
  }
  return mu;
}

Hyperparameters decode_theta(const Eigen::VectorXd& z, double s1, double s2) {
  Hyperparameters t;
  t.sigma_us = std::exp(z(0));
  t.sigma_vz = std::exp(z(1));
  t.rho_corr = std::tanh(z(2));
  t.length_scale = std::exp(z(3));
  if (z.size() == kBaseParams + kNoiseParams) {
    for (int l = 0; l < kOutputs; ++l) t.noise[l] = std::exp(z(kBaseParams + l));
  }
  t.s1 = s1;
  t.s2 = s2;
  return t;
}

Eigen::VectorXd encode_theta(const Hyperparameters& theta, bool with_noise) {
  Eigen::VectorXd z(with_noise ? kBaseParams + kNoiseParams : kBaseParams);
  z(0) = std::log(theta.sigma_us);
  z(1) = std::log(theta.sigma_vz);
  z(2) = std::atanh(theta.rho_corr);
  z(3) = std::log(theta.length_scale);
  if (with_noise) {
    for (int l = 0; l < kOutputs; ++l) z(kBaseParams + l) = std::log(theta.noise[l]);
  }
  return z;
}

GpProblem make_problem(std::span<const TrainingRow> rows, double slope_floor) {
  if (rows.size() < 3) throw Error(ErrorKind::InsufficientData, "a GP regime needs >= 3 rows");
  const std::size_t N = rows.size();
  std::vector<double> up(N), us(N), vz(N), E(N), T(N);
  Dataset data(N);
  bool all_std = true;
  for (std::size_t j = 0; j < N; ++j) {
    const auto& o = rows[j].obs;
    up[j] = o.u_p;
    us[j] = o.value[kUs];
    vz[j] = o.value[kVz];
    E[j] = o.value[kE];
    T[j] = o.value[kT];
    data[j] = o;
    all_std = all_std && o.has_stddev;
  }

  GpProblem p;
  p.temp = fit_temperature(E, T, slope_floor);
  p.scales = scales_from_data(data);
  p.mean_fn = fit_mean_function(up, us, vz);
  p.pts.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    p.pts[j] = {up[j], expansion_at(p.mean_fn, up[j], rows[j].upstream)};
  }

  const Eigen::Index n = static_cast<Eigen::Index>(N);
  p.y.resize(kOutputs * n);
  if (all_std) p.noise_var.resize(kOutputs * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int l = 0; l < kOutputs; ++l) {
      const double s = output_scale(l, p.scales.s1, p.scales.s2);
      p.y(l * n + j) = s * data[j].value[l];
      if (all_std) {
        const double sd = s * data[j].stddev[l];
        p.noise_var(l * n + j) = sd * sd;
      }
    }
  }
  return p;
}

double neg_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                          const BlockCovariance& cov) {
  const Eigen::VectorXd a = cov.half_solve(y - mu);
  return 0.5 * (a.squaredNorm() + cov.log_det() + static_cast<double>(y.size()) * kLog2Pi);
}

double neg_log_likelihood(const GpProblem& problem, const Hyperparameters& theta) {
  std::span<const double> nv;
  if (!problem.noise_trained()) nv = {problem.noise_var.data(), std::size_t(problem.noise_var.size())};
  const BlockCovariance cov = factorize(assemble_sigma(problem.pts, theta, problem.temp.b, nv));
  return neg_log_likelihood(problem.y, prior_mean(problem.pts, theta, problem.temp), cov);
}

double neg_log_prior(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                     const Eigen::VectorXd& sd) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double r = (z(i) - mean(i)) / sd(i);
    s += 0.5 * r * r + std::log(sd(i)) + 0.5 * kLog2Pi;
  }
  return s;
}

ThetaPrior default_prior(const GpProblem& p, const GpConfig& cfg) {
  const Eigen::Index N = p.n();
  const int d = p.noise_trained() ? kBaseParams + kNoiseParams : kBaseParams;
  ThetaPrior pr;
  pr.mean.resize(d);
  pr.sd.resize(d);
  pr.lo.resize(d);
  pr.hi.resize(d);

  // Spread of the base outputs about the linear mean.
  auto resid_scale = [&](int l) {
    double ss = 0.0, mag = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const double m = l == 0 ? p.pts[j].x.mean_us : p.pts[j].x.mean_vz;
      ss += (p.y(l * N + j) - m) * (p.y(l * N + j) - m);
      mag += std::abs(p.y(l * N + j));
    }
    const double sd = std::sqrt(ss / static_cast<double>(N));
    return std::max(sd, 1e-3 * mag / static_cast<double>(N));
  };
  for (int l = 0; l < 2; ++l) {
    pr.mean(l) = std::log(resid_scale(l));
    pr.sd(l) = cfg.prior_log_sd;
    pr.lo(l) = pr.mean(l) - 5.0;
    pr.hi(l) = pr.mean(l) + 5.0;
  }
  pr.mean(2) = 0.0;
  pr.sd(2) = cfg.prior_atanh_sd;
  pr.lo(2) = -kMaxAtanh;
  pr.hi(2) = kMaxAtanh;

  double umin = p.pts[0].u_p, umax = p.pts[0].u_p;
  for (const auto& pt : p.pts) {
    umin = std::min(umin, pt.u_p);
    umax = std::max(umax, pt.u_p);
  }
  const double ell = std::clamp((umax - umin) / 3.0, cfg.ell_min, cfg.ell_max);
  pr.mean(3) = std::log(ell);
  pr.sd(3) = cfg.prior_log_sd;
  pr.lo(3) = std::log(cfg.ell_min);
  pr.hi(3) = std::log(cfg.ell_max);

  if (p.noise_trained()) {
    for (int l = 0; l < kOutputs; ++l) {
      double mag = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) mag += std::abs(p.y(l * N + j));
      const double med = std::max(0.01 * mag / static_cast<double>(N), 1e-8);
      const int i = kBaseParams + l;
      pr.mean(i) = std::log(med);
      pr.sd(i) = cfg.prior_log_sd;
      pr.lo(i) = pr.mean(i) - 9.0;
      pr.hi(i) = pr.mean(i) + 4.5;
    }
  }
  return pr;
}

std::vector<double> TrainedModel::inputs() const {
  std::vector<double> u(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) u[j] = pts[j].u_p;
  return u;
}

void finalize_model(TrainedModel& m) {
  std::span<const double> nv;
  if (!m.noise_trained) nv = {m.noise_var.data(), std::size_t(m.noise_var.size())};
  m.cov = factorize(assemble_sigma(m.pts, m.theta, m.temp.b, nv));
  const Eigen::VectorXd mu = prior_mean(m.pts, m.theta, m.temp);
  m.alpha = m.cov.solve(m.y - mu);
  m.nll = neg_log_likelihood(m.y, mu, m.cov);
}

TrainedModel train(std::span<const TrainingRow> rows, const GpConfig& cfg) {
  const GpProblem p = make_problem(rows, cfg.slope_floor);
  const ThetaPrior pr = default_prior(p, cfg);

  const Objective obj = [&](const Eigen::VectorXd& z) {
    const Hyperparameters th = decode_theta(z, p.scales.s1, p.scales.s2);
    return neg_log_likelihood(p, th) + neg_log_prior(z, pr.mean, pr.sd);
  };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  OptimResult best;
  bool have = false;
  int ok = 0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    Eigen::VectorXd z0 = pr.mean;
    if (r > 0) {
      for (Eigen::Index i = 0; i < z0.size(); ++i) z0(i) += pr.sd(i) * gauss(rng);
    }
    z0 = z0.cwiseMax(pr.lo).cwiseMin(pr.hi);
    try {
      OptimResult res = minimize_box(obj, z0, pr.lo, pr.hi, cfg.optim);
      ++ok;
      if (!have || res.f < best.f) {
        best = std::move(res);
        have = true;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OptimFailed) throw;
    }
  }
  if (!have) throw Error(ErrorKind::OptimFailed, "every restart failed to factorize Sigma");

  TrainedModel m;
  m.theta = decode_theta(best.x, p.scales.s1, p.scales.s2);
  m.temp = p.temp;
  m.scales = p.scales;
  m.mean_fn = p.mean_fn;
  m.pts = p.pts;
  m.y = p.y;
  m.noise_trained = p.noise_trained();
  if (m.noise_trained) {
    m.noise_var.resize(p.y.size());
    const Eigen::Index N = p.n();
    for (int l = 0; l < kOutputs; ++l)
      m.noise_var.segment(l * N, N).setConstant(m.theta.noise[l] * m.theta.noise[l]);
  } else {
    m.noise_var = p.noise_var;
  }
  m.objective = best.f;
  m.restarts_succeeded = ok;
  finalize_model(m);
  check_stability(m);
  return m;
}

Eigen::Matrix<double, 5, 1> PosteriorPrediction::point_mean(Eigen::Index j) const {
  Eigen::Matrix<double, 5, 1> v;
  for (int l = 0; l < kOutputs; ++l) v(l) = mean_at(l, j);
  return v;
}

Eigen::Matrix<double, 5, 5> PosteriorPrediction::point_block(Eigen::Index j) const {
  Eigen::Matrix<double, 5, 5> b;
  const Eigen::Index M = size();
  for (int l = 0; l < kOutputs; ++l)
    for (int m = 0; m < kOutputs; ++m) b(l, m) = cov(l * M + j, m * M + j);
  return b;
}

RegionState PosteriorPrediction::state_at(Eigen::Index j, const TemperatureModel& temp) const {
  RegionState s;
  s.nu_z = mean_at(1, j);
  s.P = mean_at(2, j);
  s.rho = mean_at(3, j);
  s.T = mean_at(4, j);
  s.E = temp.energy(s.T);
  return s;
}

namespace {

std::vector<DesignPoint> test_design(const TrainedModel& model, std::span<const double> up,
                                     std::span<const RegionState> upstream) {
  if (up.size() != upstream.size()) {
    throw Error(ErrorKind::InvalidArgument, "one upstream state per test input is required");
  }
  std::vector<DesignPoint> t(up.size());
  for (std::size_t j = 0; j < up.size(); ++j) {
    if (!std::isfinite(up[j])) throw Error(ErrorKind::InvalidArgument, "non-finite test input");
    t[j] = {up[j], expansion_at(model.mean_fn, up[j], upstream[j])};
  }
  return t;
}

void fill_stability(PosteriorPrediction& out, std::span<const DesignPoint> t) {
  out.pressure_stable.resize(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    try {
      out.pressure_stable[j] =
          check_pressure_stability(t[j].x.upstream, {out.mean_at(0, jj), out.mean_at(1, jj)})
              .strictly_stable;
    } catch (const Error&) {
      out.pressure_stable[j] = 0;
    }
  }
}

}  // namespace

PosteriorPrediction predict(const TrainedModel& model, std::span<const double> up,
                            std::span<const RegionState> upstream) {
  PosteriorPrediction out;
  out.u_p.assign(up.begin(), up.end());
  if (up.empty()) return out;
  const std::vector<DesignPoint> t = test_design(model, up, upstream);
  const double b = model.temp.b;
  const Eigen::MatrixXd Ks = cross_sigma(t, model.pts, model.theta, b);
  const Eigen::MatrixXd Kss = cross_sigma(t, t, model.theta, b);
  out.mean = prior_mean(t, model.theta, model.temp) + Ks * model.alpha;
  const Eigen::MatrixXd V = model.cov.half_solve(Ks.transpose());
  out.cov = Kss - V.transpose() * V;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  unscale_predictions(out.mean, out.cov, model.scales.s1, model.scales.s2);
  fill_stability(out, t);
  return out;
}

PosteriorPrediction prior_predict(const TrainedModel& model, std::span<const double> up,
                                  std::span<const RegionState> upstream) {
  PosteriorPrediction out;
  out.u_p.assign(up.begin(), up.end());
  if (up.empty()) return out;
  const std::vector<DesignPoint> t = test_design(model, up, upstream);
  out.mean = prior_mean(t, model.theta, model.temp);
  out.cov = cross_sigma(t, t, model.theta, model.temp.b);
  unscale_predictions(out.mean, out.cov, model.scales.s1, model.scales.s2);
  fill_stability(out, t);
  return out;
}

double noise_variance(const TrainedModel& model, int output) {
  const double s = output_scale(output, model.scales.s1, model.scales.s2);
  const Eigen::Index N = static_cast<Eigen::Index>(model.pts.size());
  return model.noise_var.segment(output * N, N).mean() / (s * s);
}

void check_stability(const TrainedModel& model) {
  if (!check_temperature_stability(model.temp)) {
    throw Error(ErrorKind::StabilityViolation, "temperature-energy slope below the floor");
  }
  for (const auto& pt : model.pts) {
    if (!check_pressure_stability(pt.x.upstream, pt.x.front()).strictly_stable) {
      throw Error(ErrorKind::StabilityViolation,
                  "dP/dV >= 0 at u_p = " + std::to_string(pt.u_p));
    }
  }
}

}  // namespace shockgp
