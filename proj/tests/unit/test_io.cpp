#include <doctest.h>

#include <sstream>

#include "shockgp/errors.hpp"
#include "shockgp/io.hpp"

using namespace shockgp;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("observation CSV round trip") {
  const Dataset d = synth_observations(SynthConfig{}, std::vector<double>{0.25, 1.5, 3.25}, 9);
  std::stringstream ss;
  write_observations(ss, d);
  const Dataset r = read_observations(ss);
  REQUIRE(r.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(r[i].u_p == d[i].u_p);
    CHECK(r[i].wave == d[i].wave);
    CHECK(r[i].value == d[i].value);
    CHECK(r[i].stddev == d[i].stddev);
    CHECK(r[i].has_stddev);
  }

  std::stringstream blank(std::string(kObservationHeader) + "\n1,lead,12,1,40,3.9,900,0.5,,,,,,\n");
  const Dataset b = read_observations(blank);
  CHECK_FALSE(b[0].has_stddev);
}

TEST_CASE("observation CSV errors") {
  std::stringstream empty;
  CHECK(kind_of([&] { read_observations(empty); }) == ErrorKind::MalformedInput);
  std::stringstream hdr("up,wave\n");
  CHECK(kind_of([&] { read_observations(hdr); }) == ErrorKind::MalformedInput);
  std::stringstream only(std::string(kObservationHeader) + "\n");
  CHECK(kind_of([&] { read_observations(only); }) == ErrorKind::MalformedInput);
  std::stringstream bad(std::string(kObservationHeader) + "\n1,lead,x,1,40,3.9,900,0.5,,,,,,\n");
  CHECK(kind_of([&] { read_observations(bad); }) == ErrorKind::MalformedInput);
  std::stringstream label(std::string(kObservationHeader) + "\n1,elastic,12,1,40,3.9,900,0.5,,,,,,\n");
  CHECK(kind_of([&] { read_observations(label); }) == ErrorKind::MalformedInput);
}

TEST_CASE("profile CSV round trip") {
  std::vector<ProfileFrame> fr(2);
  for (int f = 0; f < 2; ++f) {
    fr[f].time = 20.0 + 5 * f;
    for (int i = 0; i < 5; ++i) {
      fr[f].x.push_back(1.0 + 2 * i);
      fr[f].value.push_back(0.1 * i + f);
    }
  }
  std::stringstream ss;
  write_profile(ss, fr);
  const auto r = read_profile(ss);
  REQUIRE(r.size() == 2);
  CHECK(r[1].time == 25.0);
  CHECK(r[1].x == fr[1].x);
  CHECK(r[1].value == fr[1].value);
  std::stringstream e;
  CHECK(kind_of([&] { read_profile(e); }) == ErrorKind::MalformedInput);
}

TEST_CASE("config parsing and validation") {
  std::stringstream empty("{}");
  const RunConfig d = read_config(empty);
  CHECK(d.waves.plastic_threshold == 2.25);
  CHECK(d.waves.pt_threshold == 4.25);
  CHECK(d.waves.gp.restarts == 8);
  CHECK(d.waves.gp.slope_floor == 1e-6);
  CHECK(d.extract.seg.min_cluster_size == 10);

  std::stringstream o(R"({"thresholds":{"plastic":2.0},"optimizer":{"restarts":3,"seed":9},"ambient":{"rho":8.9}})");
  const RunConfig c = read_config(o);
  CHECK(c.waves.plastic_threshold == 2.0);
  CHECK(c.extract.plastic_threshold == 2.0);
  CHECK(c.waves.gp.restarts == 3);
  CHECK(c.waves.gp.seed == 9);
  CHECK(c.waves.ambient.rho == 8.9);

  std::stringstream inv(R"({"thresholds":{"plastic":5.0}})");
  CHECK(kind_of([&] { read_config(inv); }) == ErrorKind::MalformedInput);
  std::stringstream junk("{not json");
  CHECK(kind_of([&] { read_config(junk); }) == ErrorKind::MalformedInput);

  std::stringstream back(config_to_json(c));
  const RunConfig c2 = read_config(back);
  CHECK(c2.waves.gp.seed == 9);
  CHECK(c2.waves.ambient.rho == 8.9);
}

TEST_CASE("base64") {
  for (const std::string s : std::vector<std::string>{"", "a", "ab", "abc", "abcd", std::string("\0\xff\x10", 3)}) {
    CHECK(base64_decode(base64_encode(s)) == s);
  }
  CHECK(base64_encode("Man") == "TWFu");
  CHECK(base64_encode("Ma") == "TWE=");
  CHECK(kind_of([] { base64_decode("abc"); }) == ErrorKind::MalformedInput);
}

TEST_CASE("bundle round trip and schema checks") {
  SynthConfig sc;
  Dataset d;
  for (const auto& o : synth_observations(sc, std::vector<double>{0.25, 0.5, 0.75, 1.0, 2.5, 2.75, 3.0}, 4))
    if (o.wave == WaveLabel::Lead) d.push_back(o);
  WaveConfig wc;
  wc.gp.restarts = 2;
  const WaveModels wm = train_sequence(d, wc);
  const std::string j = bundle_to_json(wm, "t0");
  const WaveModels back = bundle_from_json(j);
  CHECK(bundle_to_json(back, "t0") == j);
  const std::vector<double> g = {0.4, 1.3, 2.9};
  const auto a = predict_all(wm, g), b = predict_all(back, g);
  CHECK(a.wave[0]->mean == b.wave[0]->mean);
  CHECK(a.wave[0]->cov == b.wave[0]->cov);
  CHECK(back.has(WaveLabel::Plastic) == wm.has(WaveLabel::Plastic));

  std::string wrong = j;
  wrong.replace(wrong.find(kBundleSchema), std::string(kBundleSchema).size(), "other.schema");
  CHECK(kind_of([&] { bundle_from_json(wrong); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { bundle_from_json(R"({"schema":"shockgp.bundle","version":99})"); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { bundle_from_json("{oops"); }) == ErrorKind::MalformedInput);
}

TEST_CASE("band multiplier") { CHECK(kBand95 == 1.96); }
