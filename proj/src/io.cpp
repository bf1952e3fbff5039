#include "shockgp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

#include "shockgp/errors.hpp"

namespace shockgp {

using nlohmann::json;

std::string_view to_string(WaveLabel w) {
  switch (w) {
    case WaveLabel::Lead: return "lead";
    case WaveLabel::Plastic: return "plastic";
    case WaveLabel::PhaseTransformation: return "phase_transformation";
  }
  return "?";
}

WaveLabel wave_from_string(std::string_view s) {
  if (s == "lead") return WaveLabel::Lead;
  if (s == "plastic") return WaveLabel::Plastic;
  if (s == "phase_transformation") return WaveLabel::PhaseTransformation;
  throw Error(ErrorKind::MalformedInput, "unknown wave label '" + std::string(s) + "'");
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::MalformedInput,
                "line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::MalformedInput, "cannot open " + path);
  return f;
}

}  // namespace

void write_observations(std::ostream& os, const Dataset& d) {
  os << kObservationHeader << '\n';
  for (const auto& o : d) {
    os << fmt_double(o.u_p) << ',' << to_string(o.wave);
    for (double v : o.value) os << ',' << fmt_double(v);
    for (double s : o.stddev) {
      os << ',';
      if (o.has_stddev) os << fmt_double(s);
    }
    os << '\n';
  }
}

Dataset read_observations(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::MalformedInput, "empty observation file");
  if (trim(line) != kObservationHeader) {
    throw Error(ErrorKind::MalformedInput, "observation header mismatch");
  }
  Dataset d;
  int no = 1;
  while (std::getline(is, line)) {
    ++no;
    if (trim(line).empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 14) {
      throw Error(ErrorKind::MalformedInput,
                  "line " + std::to_string(no) + ": expected 14 columns, got " + std::to_string(c.size()));
    }
    ShockObservation o;
    o.u_p = parse_double(c[0], no);
    o.wave = wave_from_string(c[1]);
    for (int k = 0; k < 6; ++k) o.value[k] = parse_double(c[2 + k], no);
    bool all = true;
    for (int k = 0; k < 6; ++k) {
      if (c[8 + k].empty()) {
        all = false;
        continue;
      }
      o.stddev[k] = parse_double(c[8 + k], no);
      if (o.stddev[k] < 0.0) throw Error(ErrorKind::MalformedInput, "negative std dev");
      all = all && o.stddev[k] > 0.0;
    }
    o.has_stddev = all;
    d.push_back(o);
  }
  if (d.empty()) throw Error(ErrorKind::MalformedInput, "observation file has no rows");
  return d;
}

Dataset read_observations_file(const std::string& path) {
  auto f = open_or_throw(path);
  return read_observations(f);
}

void write_profile(std::ostream& os, const std::vector<ProfileFrame>& frames) {
  os << kProfileHeader << '\n';
  for (const auto& f : frames)
    for (std::size_t i = 0; i < f.x.size(); ++i)
      os << fmt_double(f.time) << ',' << fmt_double(f.x[i]) << ',' << fmt_double(f.value[i]) << '\n';
}

std::vector<ProfileFrame> read_profile(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::MalformedInput, "empty profile file");
  if (trim(line) != kProfileHeader) throw Error(ErrorKind::MalformedInput, "profile header mismatch");
  std::map<double, std::vector<std::pair<double, double>>> by_time;
  int no = 1;
  while (std::getline(is, line)) {
    ++no;
    if (trim(line).empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 3) throw Error(ErrorKind::MalformedInput, "line " + std::to_string(no) + ": expected 3 columns");
    by_time[parse_double(c[0], no)].emplace_back(parse_double(c[1], no), parse_double(c[2], no));
  }
  if (by_time.empty()) throw Error(ErrorKind::MalformedInput, "profile file has no rows");
  std::vector<ProfileFrame> out;
  for (auto& [t, bins] : by_time) {
    std::sort(bins.begin(), bins.end());
    ProfileFrame f;
    f.time = t;
    for (const auto& [x, v] : bins) {
      if (!f.x.empty() && x == f.x.back()) {
        throw Error(ErrorKind::MalformedInput, "duplicate bin at t=" + fmt_double(t));
      }
      f.x.push_back(x);
      f.value.push_back(v);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<ProfileFrame> read_profile_file(const std::string& path) {
  auto f = open_or_throw(path);
  return read_profile(f);
}

// ---------------------------------------------------------------- config --

namespace {

template <class T>
void take(const json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

void take_state(const json& j, RegionState& s) {
  take(j, "nu_z", s.nu_z);
  take(j, "P", s.P);
  take(j, "rho", s.rho);
  take(j, "T", s.T);
  take(j, "E", s.E);
}

json state_json(const RegionState& s) {
  return {{"nu_z", s.nu_z}, {"P", s.P}, {"rho", s.rho}, {"T", s.T}, {"E", s.E}};
}

void take_branch(const json& j, const char* key, LinearBranch& b) {
  if (!j.contains(key)) return;
  take(j.at(key), "c0", b.c0);
  take(j.at(key), "s", b.s);
}

void take_dip(const json& j, const char* key, VelocityDip& d) {
  if (!j.contains(key)) return;
  take(j.at(key), "lo", d.lo);
  take(j.at(key), "hi", d.hi);
  take(j.at(key), "amp", d.amp);
}

int property_from_string(const std::string& s) {
  for (int q = 0; q < kProperties; ++q)
    if (s == kPropertyNames[q]) return q;
  throw Error(ErrorKind::MalformedInput, "unknown property '" + s + "'");
}

}  // namespace

void validate_config(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::MalformedInput, "config: " + m); };
  const auto& w = c.waves;
  if (!(w.ambient.rho > 0.0)) bad("ambient.rho must be > 0");
  if (!(w.ambient.T > 0.0)) bad("ambient.T must be > 0");
  if (!(w.plastic_threshold < w.pt_threshold)) bad("thresholds must satisfy plastic < phase_transformation");
  if (!(w.gp.slope_floor > 0.0)) bad("temperature.epsilon must be > 0");
  if (w.gp.restarts < 1) bad("optimizer.restarts must be >= 1");
  if (!(w.gp.ell_min > 0.0 && w.gp.ell_min < w.gp.ell_max)) bad("need 0 < ell_min < ell_max");
  if (!(w.gp.optim.fd_step > 0.0)) bad("optimizer.fd_step must be > 0");
  if (w.gp.optim.max_iter < 1) bad("optimizer.max_iter must be >= 1");
  if (c.extract.seg.min_cluster_size < 2) bad("extract.min_cluster_size must be >= 2");
  if (!(c.extract.k_sigma > 0.0)) bad("extract.k_sigma must be > 0");
  if (!(c.synth.noise_frac >= 0.0)) bad("synth.noise_frac must be >= 0");
  if (!(c.synth.up_step > 0.0 && c.synth.up_max >= c.synth.up_min)) bad("bad synth grid");
  if (!(c.synth.ambient.rho > 0.0)) bad("synth ambient.rho must be > 0");
  if (c.profiles.frames < 2 || !(c.profiles.t_last > c.profiles.t_first)) bad("bad profile timing");
  if (!(c.profiles.bin_width > 0.0)) bad("profiles.bin_width must be > 0");
}

RunConfig read_config(std::istream& is) {
  RunConfig c;
  json j;
  try {
    j = json::parse(is);
    if (j.contains("ambient")) take_state(j.at("ambient"), c.waves.ambient);
    c.synth.ambient = c.waves.ambient;
    if (j.contains("thresholds")) {
      take(j["thresholds"], "plastic", c.waves.plastic_threshold);
      take(j["thresholds"], "phase_transformation", c.waves.pt_threshold);
    }
    c.extract.plastic_threshold = c.waves.plastic_threshold;
    if (j.contains("temperature")) take(j["temperature"], "epsilon", c.waves.gp.slope_floor);
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      take(o, "restarts", c.waves.gp.restarts);
      take(o, "seed", c.waves.gp.seed);
      take(o, "ell_min", c.waves.gp.ell_min);
      take(o, "ell_max", c.waves.gp.ell_max);
      take(o, "max_iter", c.waves.gp.optim.max_iter);
      take(o, "grad_tol", c.waves.gp.optim.grad_tol);
      take(o, "fd_step", c.waves.gp.optim.fd_step);
      take(o, "prior_log_sd", c.waves.gp.prior_log_sd);
      take(o, "prior_atanh_sd", c.waves.gp.prior_atanh_sd);
    }
    if (j.contains("extract")) {
      const auto& e = j["extract"];
      take(e, "min_cluster_size", c.extract.seg.min_cluster_size);
      take(e, "noise_multiplier", c.extract.seg.noise_multiplier);
      take(e, "eps_floor_rel", c.extract.seg.eps_floor_rel);
      take(e, "merge_gap", c.extract.seg.merge_gap);
      take(e, "k_sigma", c.extract.k_sigma);
      if (e.contains("reference")) c.extract.reference = property_from_string(e["reference"].get<std::string>());
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      take_branch(s, "elastic", c.synth.elastic);
      take_branch(s, "plastic", c.synth.plastic);
      take_branch(s, "phase_transformation", c.synth.phase);
      take_dip(s, "dip_elastic", c.synth.dip_elastic);
      take_dip(s, "dip_plastic", c.synth.dip_plastic);
      take(s, "plastic_onset", c.synth.plastic_onset);
      take(s, "pt_onset", c.synth.pt_onset);
      take(s, "t_intercept", c.synth.t_intercept);
      take(s, "t_slope", c.synth.t_slope);
      take(s, "noise_frac", c.synth.noise_frac);
      take(s, "up_min", c.synth.up_min);
      take(s, "up_max", c.synth.up_max);
      take(s, "up_step", c.synth.up_step);
      take(s, "holdout", c.holdout);
    }
    c.synth.plastic_threshold = c.waves.plastic_threshold;
    c.synth.pt_threshold = c.waves.pt_threshold;
    if (j.contains("profiles")) {
      const auto& p = j["profiles"];
      take(p, "bin_width", c.profiles.bin_width);
      take(p, "t_first", c.profiles.t_first);
      take(p, "t_last", c.profiles.t_last);
      take(p, "frames", c.profiles.frames);
      take(p, "noise_frac", c.profiles.noise_frac);
      take(p, "min_region_bins", c.profiles.min_region_bins);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

RunConfig read_config_file(const std::string& path) {
  auto f = open_or_throw(path);
  return read_config(f);
}

std::string config_to_json(const RunConfig& c) {
  const auto& g = c.waves.gp;
  auto branch = [](const LinearBranch& b) { return json{{"c0", b.c0}, {"s", b.s}}; };
  auto dip = [](const VelocityDip& d) { return json{{"lo", d.lo}, {"hi", d.hi}, {"amp", d.amp}}; };
  json j = {
      {"ambient", state_json(c.waves.ambient)},
      {"thresholds", {{"plastic", c.waves.plastic_threshold}, {"phase_transformation", c.waves.pt_threshold}}},
      {"temperature", {{"epsilon", g.slope_floor}}},
      {"optimizer",
       {{"restarts", g.restarts}, {"seed", g.seed}, {"ell_min", g.ell_min}, {"ell_max", g.ell_max},
        {"max_iter", g.optim.max_iter}, {"grad_tol", g.optim.grad_tol}, {"fd_step", g.optim.fd_step},
        {"prior_log_sd", g.prior_log_sd}, {"prior_atanh_sd", g.prior_atanh_sd}}},
      {"extract",
       {{"min_cluster_size", c.extract.seg.min_cluster_size},
        {"noise_multiplier", c.extract.seg.noise_multiplier},
        {"eps_floor_rel", c.extract.seg.eps_floor_rel},
        {"merge_gap", c.extract.seg.merge_gap},
        {"k_sigma", c.extract.k_sigma},
        {"reference", kPropertyNames[c.extract.reference]}}},
      {"synth",
       {{"elastic", branch(c.synth.elastic)}, {"plastic", branch(c.synth.plastic)},
        {"phase_transformation", branch(c.synth.phase)}, {"dip_elastic", dip(c.synth.dip_elastic)},
        {"dip_plastic", dip(c.synth.dip_plastic)}, {"plastic_onset", c.synth.plastic_onset},
        {"pt_onset", c.synth.pt_onset}, {"t_intercept", c.synth.t_intercept},
        {"t_slope", c.synth.t_slope}, {"noise_frac", c.synth.noise_frac}, {"up_min", c.synth.up_min},
        {"up_max", c.synth.up_max}, {"up_step", c.synth.up_step}, {"holdout", c.holdout}}},
      {"profiles",
       {{"bin_width", c.profiles.bin_width}, {"t_first", c.profiles.t_first},
        {"t_last", c.profiles.t_last}, {"frames", c.profiles.frames},
        {"noise_frac", c.profiles.noise_frac}, {"min_region_bins", c.profiles.min_region_bins}}},
  };
  return j.dump(2);
}

// ---------------------------------------------------------------- base64 --

std::string base64_encode(const std::string& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::string base64_decode(const std::string& text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  if (text.size() % 4 != 0) throw Error(ErrorKind::MalformedInput, "base64 length not a multiple of 4");
  std::string s = text;
  const std::size_t pad = s.size() - std::min(s.size(), s.find_last_not_of('=') + 1);
  std::replace(s.end() - static_cast<std::ptrdiff_t>(pad), s.end(), '=', 'A');
  std::string out;
  try {
    out.assign(It(s.begin()), It(s.end()));
  } catch (const std::exception&) {
    throw Error(ErrorKind::MalformedInput, "invalid base64 payload");
  }
  out.resize(out.size() - pad);
  return out;
}

// ---------------------------------------------------------------- bundle --

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * sizeof(double), '\0');
  if (m.size() > 0) std::memcpy(bytes.data(), m.data(), bytes.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"f64le", base64_encode(bytes)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index r = j.at("rows").get<Eigen::Index>();
  const Eigen::Index c = j.at("cols").get<Eigen::Index>();
  const std::string bytes = base64_decode(j.at("f64le").get<std::string>());
  if (bytes.size() != static_cast<std::size_t>(r * c) * sizeof(double)) {
    throw Error(ErrorKind::MalformedInput, "matrix payload size mismatch");
  }
  Eigen::MatrixXd m(r, c);
  if (m.size() > 0) std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

json model_json(const TrainedModel& m, const std::vector<RegionState>& upstream) {
  const auto& t = m.theta;
  json pts = json::array();
  for (std::size_t j = 0; j < m.pts.size(); ++j) {
    pts.push_back({{"u_p", m.pts[j].u_p}, {"upstream", state_json(upstream[j])}});
  }
  return {
      {"theta",
       {{"sigma_us", t.sigma_us}, {"sigma_vz", t.sigma_vz}, {"rho_corr", t.rho_corr},
        {"length_scale", t.length_scale}, {"noise", t.noise}, {"s1", t.s1}, {"s2", t.s2}}},
      {"temperature", {{"a", m.temp.a}, {"b", m.temp.b}, {"epsilon", m.temp.epsilon}}},
      {"mean_function", {{"us0", m.mean_fn.us0}, {"us1", m.mean_fn.us1}, {"vz0", m.mean_fn.vz0}, {"vz1", m.mean_fn.vz1}}},
      {"points", pts},
      {"noise_trained", m.noise_trained},
      {"jitter", m.cov.jitter},
      {"objective", m.objective},
      {"nll", m.nll},
      {"restarts_succeeded", m.restarts_succeeded},
      {"y", matrix_json(m.y)},
      {"noise_var", matrix_json(m.noise_var)},
      {"cholesky", matrix_json(m.cov.L)},
      {"alpha", matrix_json(m.alpha)},
  };
}

TrainedModel model_from_json(const json& j, std::vector<RegionState>& upstream) {
  TrainedModel m;
  const auto& t = j.at("theta");
  m.theta.sigma_us = t.at("sigma_us").get<double>();
  m.theta.sigma_vz = t.at("sigma_vz").get<double>();
  m.theta.rho_corr = t.at("rho_corr").get<double>();
  m.theta.length_scale = t.at("length_scale").get<double>();
  m.theta.noise = t.at("noise").get<std::array<double, kOutputs>>();
  m.theta.s1 = t.at("s1").get<double>();
  m.theta.s2 = t.at("s2").get<double>();
  m.scales = {m.theta.s1, m.theta.s2};
  const auto& tm = j.at("temperature");
  m.temp = {tm.at("a").get<double>(), tm.at("b").get<double>(), tm.at("epsilon").get<double>()};
  const auto& mf = j.at("mean_function");
  m.mean_fn = {mf.at("us0").get<double>(), mf.at("us1").get<double>(), mf.at("vz0").get<double>(),
               mf.at("vz1").get<double>()};
  upstream.clear();
  for (const auto& p : j.at("points")) {
    RegionState s;
    take_state(p.at("upstream"), s);
    upstream.push_back(s);
    const double up = p.at("u_p").get<double>();
    m.pts.push_back({up, expansion_at(m.mean_fn, up, s)});
  }
  m.noise_trained = j.at("noise_trained").get<bool>();
  m.cov.jitter = j.at("jitter").get<double>();
  m.objective = j.at("objective").get<double>();
  m.nll = j.at("nll").get<double>();
  m.restarts_succeeded = j.at("restarts_succeeded").get<int>();
  m.y = matrix_from_json(j.at("y"));
  m.noise_var = matrix_from_json(j.at("noise_var"));
  m.cov.L = matrix_from_json(j.at("cholesky"));
  m.alpha = matrix_from_json(j.at("alpha"));
  const Eigen::Index n = static_cast<Eigen::Index>(kOutputs * m.pts.size());
  if (m.y.size() != n || m.alpha.size() != n || m.cov.L.rows() != n || m.cov.L.cols() != n) {
    throw Error(ErrorKind::MalformedInput, "bundle payload dimensions disagree with point count");
  }
  return m;
}

}  // namespace

std::string bundle_to_json(const WaveModels& wm, const std::string& created) {
  RunConfig rc;
  rc.waves = wm.config;
  json models = json::array();
  for (int i = 0; i < kWaves; ++i) {
    json e = {{"wave", to_string(kWaveOrder[i])}, {"status", wm.status[i]}};
    if (wm.model[i]) e["model"] = model_json(*wm.model[i], wm.upstream[i]);
    models.push_back(e);
  }
  const json cfg = json::parse(config_to_json(rc));
  json j = {{"schema", kBundleSchema},
            {"version", kBundleVersion},
            {"created", created},
            {"config", {{"ambient", cfg["ambient"]}, {"thresholds", cfg["thresholds"]},
                        {"temperature", cfg["temperature"]}, {"optimizer", cfg["optimizer"]}}},
            {"models", models}};
  return j.dump(1);
}

WaveModels bundle_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("bundle: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", std::string()) != kBundleSchema ||
      j.value("version", -1) != kBundleVersion) {
    throw Error(ErrorKind::SchemaMismatch, std::string("expected ") + kBundleSchema + " version " +
                                               std::to_string(kBundleVersion));
  }
  try {
    WaveModels wm;
    std::stringstream cs(j.at("config").dump());
    wm.config = read_config(cs).waves;
    const auto& models = j.at("models");
    if (models.size() != kWaves) throw Error(ErrorKind::MalformedInput, "bundle must list 3 waves");
    for (int i = 0; i < kWaves; ++i) {
      const auto& e = models[i];
      if (wave_from_string(e.at("wave").get<std::string>()) != kWaveOrder[i]) {
        throw Error(ErrorKind::MalformedInput, "bundle waves out of order");
      }
      wm.status[i] = e.at("status").get<std::string>();
      if (e.contains("model")) wm.model[i] = model_from_json(e["model"], wm.upstream[i]);
    }
    return wm;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("bundle: ") + e.what());
  }
}

}  // namespace shockgp
