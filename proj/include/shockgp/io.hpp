#pragma once

// CSV, config and model-bundle serialization.

#include <iosfwd>
#include <string>
#include <vector>

#include "shockgp/extract.hpp"
#include "shockgp/observation.hpp"
#include "shockgp/synth.hpp"
#include "shockgp/waves.hpp"

namespace shockgp {

inline constexpr const char* kObservationHeader =
    "up_kms,wave_label,us_kms,vz_kms,P_GPa,rho_gcc,T_K,E_spec,us_std,vz_std,P_std,rho_std,T_std,E_std";
inline constexpr const char* kProfileHeader = "time_ps,bin_center_nm,value";

inline constexpr const char* kBundleSchema = "shockgp.bundle";
inline constexpr int kBundleVersion = 1;

/// 95% band half-width in standard deviations.
inline constexpr double kBand95 = 1.96;

void write_observations(std::ostream& os, const Dataset& d);
Dataset read_observations(std::istream& is);  // throws MalformedInput
Dataset read_observations_file(const std::string& path);

void write_profile(std::ostream& os, const std::vector<ProfileFrame>& frames);
std::vector<ProfileFrame> read_profile(std::istream& is);
std::vector<ProfileFrame> read_profile_file(const std::string& path);

/// Property file stems in ProfileSeries order.
inline constexpr std::array<const char*, kProperties> kPropertyNames = {"vz", "P", "rho", "T", "E"};

struct RunConfig {
  WaveConfig waves{};
  ExtractConfig extract{};
  SynthConfig synth{};
  ProfileSpec profiles{};
  std::vector<double> holdout{1.75, 3.5, 5.25};
};

/// Reads a JSON config; absent keys keep their defaults. Throws MalformedInput.
RunConfig read_config(std::istream& is);
RunConfig read_config_file(const std::string& path);
std::string config_to_json(const RunConfig& cfg);
void validate_config(const RunConfig& cfg);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

/// Bundle JSON. The "created" field is the only non-deterministic content.
std::string bundle_to_json(const WaveModels& models, const std::string& created);
/// Throws SchemaMismatch on a wrong schema tag or version.
WaveModels bundle_from_json(const std::string& text);

}  // namespace shockgp
