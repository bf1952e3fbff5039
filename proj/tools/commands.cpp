#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "shockgp/errors.hpp"
#include "shockgp/extract.hpp"
#include "shockgp/io.hpp"
#include "shockgp/kernel.hpp"
#include "shockgp/moments.hpp"
#include "shockgp/synth.hpp"
#include "shockgp/thermo.hpp"
#include "shockgp/waves.hpp"
#include "svg.hpp"

namespace shockgp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// A failure with its exit code and a flat JSON report for stderr.
struct CliError {
  int code;
  json report;
};

int code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::MalformedInput:
    case ErrorKind::InvalidArgument: return kMalformed;
    case ErrorKind::NoPlateaus:
    case ErrorKind::DegenerateTimes:
    case ErrorKind::MisalignedSegments:
    case ErrorKind::DegenerateFront:
    case ErrorKind::NoDensityJump: return kValidation;
    case ErrorKind::EmptyRegime:
    case ErrorKind::OptimFailed:
    case ErrorKind::NonPSD:
    case ErrorKind::StabilityViolation:
    case ErrorKind::InsufficientData: return kTraining;
    case ErrorKind::SchemaMismatch: return kSchema;
  }
  return kFailure;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

RunConfig load_config(const Common& c) {
  RunConfig rc = c.config.empty() ? RunConfig{} : read_config_file(c.config);
  validate_config(rc);
  return rc;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MalformedInput, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw CliError{kFailure, {{"error", "IoError"}, {"message", "cannot write " + path.string()}}};
}

// Output goes to the --out file, or stdout when none is given. Contents are
// fully built before anything is written.
void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty() || c.out == "-") {
    out << text;
  } else {
    write_text(c.out, text);
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedInput, "bad number in list: '" + tok + "'");
    }
  }
  return v;
}

// "start:stop:step" inclusive, or a comma list.
std::vector<double> parse_grid(const std::string& s) {
  if (s.find(':') == std::string::npos) return parse_list(s);
  std::string t = s;
  std::replace(t.begin(), t.end(), ':', ',');
  const auto p = parse_list(t);
  if (p.size() != 3 || !(p[2] > 0.0) || p[1] < p[0]) {
    throw Error(ErrorKind::MalformedInput, "grid must be start:stop:step with step > 0");
  }
  const auto n = static_cast<long>(std::floor((p[1] - p[0]) / p[2] + 1e-9)) + 1;
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = p[0] + static_cast<double>(i) * p[2];
  return g;
}

bool contains_close(const std::vector<double>& v, double x) {
  return std::any_of(v.begin(), v.end(), [x](double y) { return std::abs(x - y) < 1e-9; });
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

WaveModels load_bundle(const std::string& path) { return bundle_from_json(read_text(path)); }

// ------------------------------------------------------------------ synth --

struct SynthArgs {
  bool skip_profiles = false;
};

void cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out) {
  if (c.out.empty()) throw Error(ErrorKind::InvalidArgument, "synth needs --out DIR");
  const RunConfig rc = load_config(c);
  const std::uint64_t seed = c.seed.value_or(1);
  const fs::path dir(c.out);
  fs::create_directories(dir);

  const auto grid = synth_grid(rc.synth);
  std::vector<double> train_up, hold_up;
  for (double u : grid) (contains_close(rc.holdout, u) ? hold_up : train_up).push_back(u);

  std::ostringstream obs, hold;
  write_observations(obs, synth_observations(rc.synth, train_up, seed));
  write_text(dir / "observations.csv", obs.str());
  if (!hold_up.empty()) {
    write_observations(hold, synth_observations(rc.synth, hold_up, seed + 1));
    write_text(dir / "holdout.csv", hold.str());
  }

  json manifest = {{"simulations", json::array()}};
  if (!a.skip_profiles) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto truth = synth_truth(rc.synth, grid[i]);
      const ProfileSeries ps = synth_profiles(rc.synth.ambient, truth, rc.profiles,
                                              seed * 1000003ULL + 7919ULL * (i + 1));
      const std::string sub = "profiles/up_" + fixed2(grid[i]);
      json files;
      for (int k = 0; k < kProperties; ++k) {
        std::ostringstream os;
        write_profile(os, ps.frames[k]);
        const std::string rel = sub + "/" + kPropertyNames[k] + ".csv";
        write_text(dir / rel, os.str());
        files[kPropertyNames[k]] = rel;
      }
      manifest["simulations"].push_back({{"u_p", grid[i]}, {"profiles", files}});
    }
    write_text(dir / "manifest.json", manifest.dump(1) + "\n");
  }
  write_text(dir / "config.json", config_to_json(rc) + "\n");
  out << dir.string() << '\n';
}

// ---------------------------------------------------------------- extract --

struct ExtractArgs {
  std::string manifest;
  std::string profiles;
  std::optional<double> u_p;
  bool verbose = false;
};

ProfileSeries read_series(const fs::path& base, const json& files) {
  ProfileSeries s;
  for (int k = 0; k < kProperties; ++k) {
    if (!files.contains(kPropertyNames[k])) {
      throw Error(ErrorKind::MalformedInput, std::string("manifest lacks ") + kPropertyNames[k]);
    }
    s.frames[k] = read_profile_file((base / files[kPropertyNames[k]].get<std::string>()).string());
  }
  return s;
}

void cmd_extract(const Common& c, const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig rc = load_config(c);
  std::vector<std::pair<double, ProfileSeries>> sims;
  if (!a.manifest.empty()) {
    json m;
    try {
      m = json::parse(read_text(a.manifest));
      const fs::path base = fs::path(a.manifest).parent_path();
      for (const auto& s : m.at("simulations")) {
        sims.emplace_back(s.at("u_p").get<double>(), read_series(base, s.at("profiles")));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedInput, std::string("manifest: ") + e.what());
    }
  } else if (!a.profiles.empty() && a.u_p) {
    json files;
    for (int k = 0; k < kProperties; ++k) files[kPropertyNames[k]] = std::string(kPropertyNames[k]) + ".csv";
    sims.emplace_back(*a.u_p, read_series(a.profiles, files));
  } else {
    throw Error(ErrorKind::InvalidArgument, "extract needs --manifest, or --profiles DIR with --up");
  }
  if (sims.empty()) throw Error(ErrorKind::MalformedInput, "no simulations listed");

  Dataset rows;
  for (const auto& [up, series] : sims) {
    const ExtractResult r = extract_simulation(series, up, rc.extract);
    if (a.verbose)
      for (const auto& w : r.warnings) err << json{{"warning", w}, {"u_p", up}}.dump() << '\n';
    for (const auto& w : r.waves) {
      if (!w.check.pass()) {
        throw CliError{kValidation,
                       {{"error", "JumpValidationFailed"},
                        {"u_p", up},
                        {"wave", std::string(to_string(w.obs.wave))},
                        {"us_fit", w.track.u_s},
                        {"us_mass", w.check.us_mass},
                        {"us_mass_std", w.check.us_mass_std},
                        {"us_momentum", w.check.us_momentum},
                        {"us_momentum_std", w.check.us_momentum_std},
                        {"pass_mass", w.check.pass_mass},
                        {"pass_momentum", w.check.pass_momentum}}};
      }
      rows.push_back(w.obs);
    }
  }
  std::ostringstream os;
  write_observations(os, rows);
  emit(c, os.str(), out);
}

// -------------------------------------------------------------------- fit --

struct FitArgs {
  std::string data;
  std::string timestamp;
  bool allow_partial = false;
};

void cmd_fit(const Common& c, const FitArgs& a, std::ostream& out) {
  RunConfig rc = load_config(c);
  if (c.seed) rc.waves.gp.seed = *c.seed;
  const Dataset d = read_observations_file(a.data);
  WaveModels wm;
  try {
    wm = train_sequence(d, rc.waves);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyRegime && e.kind() != ErrorKind::OptimFailed) throw;
    throw CliError{kTraining, {{"error", std::string(to_string(e.kind()))},
                               {"regime", "lead"},
                               {"message", e.what()}}};
  }
  if (!a.allow_partial) {
    for (WaveLabel w : kWaveOrder) {
      if (wm.has(w)) continue;
      const std::string& st = wm.status[static_cast<int>(w)];
      const std::string kind = st.rfind("OptimFailed", 0) == 0 ? "OptimFailed" : "EmptyRegime";
      throw CliError{kTraining,
                     {{"error", kind}, {"regime", std::string(to_string(w))}, {"message", st}}};
    }
  }
  for (WaveLabel w : kWaveOrder)
    if (wm.has(w)) check_stability(wm.at(w));
  emit(c, bundle_to_json(wm, a.timestamp.empty() ? utc_now() : a.timestamp) + "\n", out);
}

// ---------------------------------------------------------------- predict --

struct GridArgs {
  std::string bundle;
  std::string grid = "0.25:6:0.25";
};

constexpr const char* kQtyNames[kOutputs] = {"us", "vz", "P", "rho", "T"};
constexpr const char* kColors[kWaves] = {"#1f77b4", "#d62728", "#2ca02c"};

// Index of u in a prediction's grid, or -1.
Eigen::Index find_up(const PosteriorPrediction& p, double u) {
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (std::abs(p.u_p[static_cast<std::size_t>(j)] - u) < 1e-12) return j;
  return -1;
}

std::string predict_csv(const WavePredictions& wp, const std::vector<double>& grid) {
  std::ostringstream os;
  os << "up_kms,n_waves";
  for (WaveLabel w : kWaveOrder)
    for (const char* q : kQtyNames)
      os << ',' << to_string(w) << '_' << q << "_mean," << to_string(w) << '_' << q << "_std";
  os << '\n';
  for (double u : grid) {
    std::ostringstream cells;
    int n = 0;
    for (int i = 0; i < kWaves; ++i) {
      const auto& p = wp.wave[i];
      const Eigen::Index j = p ? find_up(*p, u) : -1;
      if (j >= 0) ++n;
      for (int l = 0; l < kOutputs; ++l) {
        cells << ',';
        if (j >= 0) cells << fmt(p->mean_at(l, j));
        cells << ',';
        if (j >= 0) cells << fmt(std::sqrt(std::max(0.0, p->var_at(l, j))));
      }
    }
    os << fmt(u) << ',' << n << cells.str() << '\n';
  }
  return os.str();
}

std::string predict_svg(const WavePredictions& wp) {
  std::vector<svg::Panel> panels;
  const char* units[kOutputs] = {"km/s", "km/s", "GPa", "g/cm^3", "K"};
  for (int l = 0; l < kOutputs; ++l) {
    svg::Panel pn{std::string(kQtyNames[l]) + " vs u_p (95% band)", "u_p [km/s]",
                  std::string(kQtyNames[l]) + " [" + units[l] + "]", {}, {}};
    for (int i = 0; i < kWaves; ++i) {
      const auto& p = wp.wave[i];
      if (!p) continue;
      svg::Series s{std::string(to_string(kWaveOrder[i])), kColors[i], {}, {}, {}, {}};
      for (Eigen::Index j = 0; j < p->size(); ++j) {
        const double m = p->mean_at(l, j), sd = std::sqrt(std::max(0.0, p->var_at(l, j)));
        s.x.push_back(p->u_p[static_cast<std::size_t>(j)]);
        s.y.push_back(m);
        s.lo.push_back(m - kBand95 * sd);
        s.hi.push_back(m + kBand95 * sd);
      }
      pn.series.push_back(std::move(s));
    }
    panels.push_back(std::move(pn));
  }
  return svg::render(panels, 3);
}

void cmd_predict(const Common& c, const GridArgs& a, std::ostream& out) {
  const WaveModels wm = load_bundle(a.bundle);
  const auto grid = parse_grid(a.grid);
  const WavePredictions wp = predict_all(wm, grid);
  emit(c, c.format == "svg" ? predict_svg(wp) : predict_csv(wp, grid), out);
}

// ------------------------------------------------------------------ locus --

std::string locus_csv(const std::vector<LocusPoint>& pts) {
  std::ostringstream os;
  os << "wave_label,up_kms";
  for (const char* pre : {"rhoP", "rhoT"})
    for (const char* f : {"cx", "cy", "var_x", "var_y", "cov_xy", "semi_major", "semi_minor", "angle_rad"})
      os << ',' << pre << '_' << f;
  os << '\n';
  for (const auto& p : pts) {
    os << to_string(p.wave) << ',' << fmt(p.u_p);
    for (const Ellipse* e : {&p.rho_P, &p.rho_T}) {
      for (double v : {e->cx, e->cy, e->var_x, e->var_y, e->cov_xy, e->semi_major, e->semi_minor, e->angle})
        os << ',' << fmt(v);
    }
    os << '\n';
  }
  return os.str();
}

std::string locus_svg(const std::vector<LocusPoint>& pts) {
  std::vector<svg::Panel> panels(2);
  panels[0] = {"P-rho locus (2 std)", "rho [g/cm^3]", "P [GPa]", {}, {}};
  panels[1] = {"T-rho locus (2 std)", "rho [g/cm^3]", "T [K]", {}, {}};
  for (int i = 0; i < kWaves; ++i) {
    svg::Series sp{std::string(to_string(kWaveOrder[i])), kColors[i], {}, {}, {}, {}};
    svg::Series st = sp;
    for (const auto& p : pts) {
      if (p.wave != kWaveOrder[i]) continue;
      sp.x.push_back(p.rho_P.cx);
      sp.y.push_back(p.rho_P.cy);
      st.x.push_back(p.rho_T.cx);
      st.y.push_back(p.rho_T.cy);
      panels[0].ellipses.push_back({p.rho_P.cx, p.rho_P.cy, p.rho_P.semi_major, p.rho_P.semi_minor,
                                    p.rho_P.angle, kColors[i]});
      panels[1].ellipses.push_back({p.rho_T.cx, p.rho_T.cy, p.rho_T.semi_major, p.rho_T.semi_minor,
                                    p.rho_T.angle, kColors[i]});
    }
    if (sp.x.empty()) continue;
    panels[0].series.push_back(std::move(sp));
    panels[1].series.push_back(std::move(st));
  }
  return svg::render(panels, 2);
}

void cmd_locus(const Common& c, const GridArgs& a, std::ostream& out) {
  const WaveModels wm = load_bundle(a.bundle);
  const auto pts = hugoniot_locus(wm, parse_grid(a.grid));
  emit(c, c.format == "svg" ? locus_svg(pts) : locus_csv(pts), out);
}

// --------------------------------------------------------------- selftest --

// Quick internal consistency checks; the full suites live in the tests.
void cmd_selftest(const Common& c, std::ostream& out) {
  std::mt19937_64 rng(c.seed.value_or(42));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto point = [&]() {
    RegionState up{0.5 * U(rng), 1.0 + 10.0 * U(rng), 3.0 + U(rng), 300.0, 0.5 * U(rng)};
    const double vz = up.nu_z + 0.2 + 2.0 * U(rng);
    const double us = vz + 2.0 + 8.0 * U(rng);
    return ExpansionPoint{up, us, vz};
  };
  bool all = true;
  auto report = [&](const char* name, bool ok, double metric) {
    all = all && ok;
    out << "selftest " << name << ' ' << (ok ? "pass" : "FAIL") << " metric=" << metric << '\n';
  };

  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const ExpansionPoint x = point();
    const double h = 1e-5;
    for (Quantity q : {Quantity::Pressure, Quantity::Density, Quantity::Energy}) {
      const auto g = jump_derivatives(q, x.upstream, x.front());
      auto f = [&](double us, double vz) { return jump_value(q, x.upstream, {us, vz}); };
      const double fd = (f(x.mean_us + h, x.mean_vz) - f(x.mean_us - h, x.mean_vz)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.d_us) / std::max(1.0, std::abs(g.d_us)));
    }
  }
  report("derivatives", worst < 1e-6, worst);

  worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const ExpansionPoint a = point(), b = point();
    const CrossKernel k{0.3 * U(rng), 0.05 * U(rng), 0.05 * U(rng), 0.1 * U(rng)};
    for (Quantity ql : kStateOrder)
      for (Quantity qm : kStateOrder) {
        const double g = delta_cov(ql, qm, a, b, k, 250.0), e = explicit_block(ql, qm, a, b, k, 250.0);
        worst = std::max(worst, std::abs(g - e) / std::max(1.0, std::abs(g)));
      }
  }
  report("explicit_blocks", worst < 1e-12, worst);

  std::vector<DesignPoint> pts;
  for (int j = 0; j < 21; ++j) pts.push_back({0.25 * (j + 1), point()});
  Hyperparameters th;
  th.sigma_us = 0.8;
  th.sigma_vz = 0.3;
  th.rho_corr = 0.6;
  th.length_scale = 1.5;
  th.s1 = 0.01;
  th.s2 = 1e-3;
  const Eigen::MatrixXd S = assemble_sigma(pts, th, 250.0);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0);
  report("structural_psd", lmin >= -1e-8, lmin);

  const RegionState amb{0.0, 0.0, 3.215, 300.0, 0.0};
  const double up = 1.3, us = 9.0;
  const double r1 = jump_density(amb, {us, up}), p1 = jump_pressure(amb, {us, up});
  const double dev = std::abs(r1 - amb.rho * us / (us - up)) + std::abs(p1 - amb.rho * us * up);
  report("single_wave", dev < 1e-12, dev);

  if (!all) throw CliError{kFailure, {{"error", "SelftestFailed"}}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"shockgp: thermodynamically consistent shock-Hugoniot regression"};
  app.require_subcommand(1);
  Common c;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", c.config, "JSON config file (absent keys keep defaults)");
    s->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { c.seed = seed; });
    s->add_option("--out", c.out, "output file, '-' for stdout");
    s->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "svg"}));
  };

  ExtractArgs ea;
  auto* ex = app.add_subcommand("extract", "profile CSVs -> observation CSV");
  add_common(ex);
  ex->add_option("--manifest", ea.manifest, "JSON listing simulations and their five profile files");
  ex->add_option("--profiles", ea.profiles, "directory holding vz.csv P.csv rho.csv T.csv E.csv");
  ex->add_option("--up", ea.u_p, "piston velocity of the --profiles simulation [km/s]");
  ex->add_flag("--verbose", ea.verbose, "report skipped frames on stderr");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "observation CSV -> model bundle");
  add_common(fit);
  fit->add_option("data,--data", fa.data, "observation CSV")->required();
  fit->add_option("--timestamp", fa.timestamp, "value of the bundle's created field");
  fit->add_flag("--allow-partial", fa.allow_partial, "write the bundle even if trailing regimes failed");

  GridArgs ga;
  auto* pr = app.add_subcommand("predict", "bundle -> per-wave posterior mean/std on a u_p grid");
  add_common(pr);
  pr->add_option("bundle,--bundle", ga.bundle, "model bundle")->required();
  pr->add_option("--grid", ga.grid, "start:stop:step or comma list")->capture_default_str();

  auto* lo = app.add_subcommand("locus", "bundle -> P-rho and T-rho 2-std ellipses");
  add_common(lo);
  lo->add_option("bundle,--bundle", ga.bundle, "model bundle")->required();
  lo->add_option("--grid", ga.grid, "start:stop:step or comma list")->capture_default_str();

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "synthetic observations, holdout and step profiles");
  add_common(sy);
  sy->add_flag("--skip-profiles", sa.skip_profiles, "observation CSVs only");

  auto* st = app.add_subcommand("selftest", "quick internal consistency checks");
  add_common(st);

  auto fail = [&](int code, const json& report) {
    err << report.dump() << '\n';
    return code;
  };
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return kOk;
      }
      return fail(kMalformed, {{"error", "UsageError"}, {"message", e.what()}});
    }
    if (*ex) cmd_extract(c, ea, out, err);
    else if (*fit) cmd_fit(c, fa, out);
    else if (*pr) cmd_predict(c, ga, out);
    else if (*lo) cmd_locus(c, ga, out);
    else if (*sy) cmd_synth(c, sa, out);
    else if (*st) cmd_selftest(c, out);
    return kOk;
  } catch (const CliError& e) {
    return fail(e.code, e.report);
  } catch (const Error& e) {
    return fail(code_for(e.kind()), {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(kFailure, {{"error", "Unexpected"}, {"message", e.what()}});
  }
}

}  // namespace shockgp::cli
