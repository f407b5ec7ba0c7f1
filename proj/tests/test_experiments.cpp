#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctsense/experiments.hpp"

using namespace ctsense;

namespace {

ProtocolSpec small_spec(SensorPreset preset, std::uint64_t seed) {
  ProtocolSpec spec;
  spec.preset = preset;
  spec.master_seed = seed;
  spec.grid_step_mm = 5.0;  // 3x3 grid
  spec.grid_repeats = 1;
  spec.random_count = 4;
  spec.random_repeats = 1;
  spec.sweep_duration_s = 0.4;
  return spec;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("splitmix64 mixes and is deterministic") {
  CHECK(splitmix64(1) != splitmix64(2));
  CHECK(splitmix64(0) != 0);
  CHECK(splitmix64(42) == splitmix64(42));
  // nearby seeds should diverge in the high bits
  CHECK((splitmix64(7) >> 32) != (splitmix64(8) >> 32));
}

TEST_CASE("protocol row counts") {
  SUBCASE("grid only: 11x11 with one repeat is 121 rows") {
    ProtocolSpec spec;
    spec.preset = SensorPreset::P31;
    spec.grid_repeats = 1;
    spec.random_count = 0;
    spec.random_repeats = 0;
    spec.sweep_duration_s = 0.1;
    const Dataset d = generate_dataset(spec);
    CHECK(d.rows.size() == 121);
    d.validate();
    // corners of the grid are present
    bool has_origin = false, has_far = false;
    for (const auto& r : d.rows) {
      if (r.inlet_mm == 0.0 && r.outlet_mm == 0.0) has_origin = true;
      if (r.inlet_mm == 10.0 && r.outlet_mm == 10.0) has_far = true;
      CHECK(r.features.size() == static_cast<std::size_t>(spec.feature_bins));
      CHECK(r.sensor == "p31");
    }
    CHECK(has_origin);
    CHECK(has_far);
  }

  SUBCASE("full protocol spec describes 442 rows") {
    ProtocolSpec spec;
    const int grid = 11 * 11 * spec.grid_repeats;
    const int rand_rows = spec.random_count * spec.random_repeats;
    CHECK(grid + rand_rows == 442);
  }
}

TEST_CASE("dataset generation is byte-identical for a fixed master seed") {
  const ProtocolSpec spec = small_spec(SensorPreset::Pdual, 99);
  const Dataset a = generate_dataset(spec);
  const Dataset b = generate_dataset(spec);
  write_csv("det_a.csv", a);
  write_csv("det_b.csv", b);
  const std::string bytes_a = file_bytes("det_a.csv");
  const std::string bytes_b = file_bytes("det_b.csv");
  std::remove("det_a.csv");
  std::remove("det_b.csv");
  CHECK(!bytes_a.empty());
  CHECK(bytes_a == bytes_b);

  ProtocolSpec other = spec;
  other.master_seed = 100;
  const Dataset c = generate_dataset(other);
  bool differs = false;
  for (std::size_t i = 0; i < a.rows.size() && !differs; ++i)
    for (std::size_t f = 0; f < a.rows[i].features.size(); ++f)
      if (a.rows[i].features[f] != c.rows[i].features[f]) {
        differs = true;
        break;
      }
  CHECK(differs);
}

TEST_CASE("repetitions share stretch but differ in noise seed") {
  ProtocolSpec spec = small_spec(SensorPreset::P31, 5);
  spec.grid_repeats = 2;
  spec.random_count = 0;
  const Dataset d = generate_dataset(spec);
  REQUIRE(d.rows.size() == 18);
  // rows come in repetition pairs over the same stretch grid
  int pairs = 0;
  for (const auto& a : d.rows) {
    if (a.repetition != 0) continue;
    for (const auto& b : d.rows) {
      if (b.repetition == 1 && b.inlet_mm == a.inlet_mm &&
          b.outlet_mm == a.outlet_mm) {
        ++pairs;
        CHECK(b.seed != a.seed);
      }
    }
  }
  CHECK(pairs == 9);
}

TEST_CASE("evaluation recovers targets from ideal features") {
  // Features that encode the targets exactly: the regressor should be nearly
  // perfect, which exercises the split/fit/score plumbing end to end.
  Dataset d;
  for (int i = 0; i <= 10; ++i) {
    for (int o = 0; o <= 10; ++o) {
      DataRow r;
      r.inlet_mm = i;
      r.outlet_mm = o;
      r.total_mm = i + o;
      r.features = {static_cast<double>(i), static_cast<double>(o),
                    static_cast<double>(i + o), 1.0};
      d.rows.push_back(r);
    }
  }
  const EvalReport report = run_evaluation(d, 3, {200, 0.1, 4, 2});
  CHECK(report.train_rows == 96);
  CHECK(report.test_rows == 25);
  CHECK(report.mae(Target::Inlet) <= 0.1);
  CHECK(report.mae(Target::Outlet) <= 0.1);
  CHECK(report.mae(Target::Total) <= 0.1);

  const nlohmann::json j = report.to_json();
  CHECK(j.contains("targets"));
  CHECK(j.contains("train_rows"));
  CHECK(j.contains("test_rows"));
  CHECK(j["targets"].size() == 3);
  CHECK(j["targets"][0].contains("mae_mm"));
  CHECK(j["targets"][0].contains("target"));
}

TEST_CASE("outlet stretch barely moves the slope; inlet stretch lowers it") {
  ProtocolSpec spec;
  spec.preset = SensorPreset::Pdual;
  spec.noise_floor = 0.0;
  const std::vector<StretchState> conditions{
      {0.0, 0.0}, {0.0, 10.0}, {10.0, 0.0}};
  const auto rows = slope_table(SensorPreset::Pdual, conditions, spec);
  REQUIRE(rows.size() == 3);
  const double neutral = rows[0].slope_hz_per_mps;
  CHECK(neutral == doctest::Approx(670.0).epsilon(0.05));
  CHECK(std::abs(rows[1].slope_hz_per_mps - neutral) <= 0.02 * neutral);
  CHECK(rows[2].slope_hz_per_mps < 0.95 * neutral);
}

TEST_CASE("similarity report shape and diagonal") {
  ProtocolSpec spec = small_spec(SensorPreset::P31, 11);
  spec.grid_step_mm = 5.0;
  const SimilarityReport rep = mutual_similarity(SensorPreset::P31, spec);
  REQUIRE(rep.stretch_points_mm.size() == 3);
  REQUIRE(rep.matrix.size() == 9);
  for (double v : rep.matrix) {
    CHECK(v <= 1.0 + 1e-9);
    CHECK(v >= -1.0 - 1e-9);
  }
  // (a,a) vs (a,a) compares a spectrogram against a re-synthesis of itself
  // with a different noise seed, so the diagonal should be strongly positive.
  for (std::size_t i = 0; i < 3; ++i) CHECK(rep.at(i, i) > 0.5);
  CHECK(rep.mean_entropy_bits > 0.0);

  const nlohmann::json j = rep.to_json();
  CHECK(j.contains("matrix"));
  CHECK(j.contains("mean_correlation"));
  CHECK(j.contains("mean_entropy_bits"));
}

TEST_CASE("protocol spec JSON round trip") {
  ProtocolSpec spec = small_spec(SensorPreset::P41, 77);
  spec.noise_floor = 0.07;
  spec.workers = 2;
  const ProtocolSpec back = ProtocolSpec::from_json(spec.to_json());
  CHECK(back.preset == spec.preset);
  CHECK(back.master_seed == spec.master_seed);
  CHECK(back.grid_step_mm == spec.grid_step_mm);
  CHECK(back.random_count == spec.random_count);
  CHECK(back.noise_floor == spec.noise_floor);
  CHECK(back.sweep_duration_s == spec.sweep_duration_s);
  CHECK(back.workers == spec.workers);
  CHECK(back.acoustics.band_low_hz == spec.acoustics.band_low_hz);
}

TEST_CASE("finger scenario reports stretch from poses") {
  ProtocolSpec spec = small_spec(SensorPreset::Pdual, 21);
  spec.noise_floor = 0.0;
  // tiny ensemble: this checks plumbing, not accuracy
  const Dataset d = generate_dataset(spec);
  const auto [train, test] = train_test_split(d, 0.8, 1);
  const GbrParams params{20, 0.1, 3, 2};
  const auto inlet = fit_gbr(train, Target::Inlet, params);
  const auto outlet = fit_gbr(train, Target::Outlet, params);
  const auto total = fit_gbr(train, Target::Total, params);

  const std::vector<JointConfig> poses{{0.0, 0.0, 6.0}, {1.0, 0.5, 6.0}};
  const auto rows = finger_scenario(poses, spec, inlet, outlet, total);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].stretch.inlet_mm == 0.0);
  CHECK(rows[0].stretch.outlet_mm == 0.0);
  CHECK(rows[1].stretch.inlet_mm == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(rows[1].stretch.outlet_mm == doctest::Approx(3.0).epsilon(1e-9));
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.predicted_inlet_mm));
    CHECK(std::isfinite(r.predicted_total_mm));
    CHECK(r.slope_hz_per_mps > 0.0);
  }
}
