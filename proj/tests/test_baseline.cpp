#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "infpos/baseline.hpp"
#include "infpos/error.hpp"
#include "infpos/eval.hpp"

using namespace infpos;

namespace {

Cir single_tap_cir(int index, float amp = 1.0f, int taps = 256) {
  Cir cir;
  cir.tap_spacing = 10e-9;
  cir.taps.assign(taps, {0.0f, 0.0f});
  cir.taps[index] = {amp, 0.0f};
  return cir;
}

// Exact continuous ToA for a UE/TRP pair (no tap quantization).
double true_toa(const Position& ue, const Position& trp) {
  const double dx = ue.x - trp.x, dy = ue.y - trp.y, dz = ue.z - trp.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz) / kSpeedOfLight;
}

}  // namespace

TEST_CASE("estimate_toa: single tap, threshold logic, invalid input") {
  const Cir cir = single_tap_cir(10);
  const ToaMeasurement m = estimate_toa(cir, 20.0, 3);
  CHECK(m.valid);
  CHECK(m.trp_index == 3);
  CHECK(m.toa == doctest::Approx(10 * 10e-9));

  // weak early tap 30 dB below the peak is ignored at a 20 dB threshold
  Cir two = single_tap_cir(20);
  two.taps[5] = {static_cast<float>(std::sqrt(1e-3)), 0.0f};
  CHECK(estimate_toa(two, 20.0).toa == doctest::Approx(20 * 10e-9));
  // a 40 dB threshold admits it
  CHECK(estimate_toa(two, 40.0).toa == doctest::Approx(5 * 10e-9));

  Cir zero;
  zero.taps.assign(256, {0.0f, 0.0f});
  CHECK_FALSE(estimate_toa(zero, 20.0).valid);
}

TEST_CASE("estimate_toa is shift-consistent") {
  const Scenario s = build_scenario(ScenarioConfig{});
  ChannelParams p;
  p.shadow_sigma_los = 0.0;
  p.shadow_sigma_nlos = 0.0;
  RngStream stream(9);
  const Cir cir = generate_cir(s, p, {40.0, 25.0, 1.5}, s.trp_positions[4], false, stream);
  const double t0 = estimate_toa(cir, 20.0).toa;
  for (int shift : {1, 5, 17}) {
    Cir shifted;
    shifted.tap_spacing = cir.tap_spacing;
    shifted.taps.assign(cir.taps.size(), {0.0f, 0.0f});
    for (std::size_t k = 0; k + shift < cir.taps.size(); ++k)
      shifted.taps[k + shift] = cir.taps[k];
    CHECK(estimate_toa(shifted, 20.0).toa ==
          doctest::Approx(t0 + shift * cir.tap_spacing).epsilon(1e-12));
  }
}

TEST_CASE("noiseless LoS link yields the geometric ToA") {
  const Scenario s = build_scenario(ScenarioConfig{});
  ChannelParams p;
  p.shadow_sigma_los = 0.0;
  const Position ue{55.0, 33.0, 1.5};
  const Position trp = s.trp_positions[8];
  RngStream stream(10);
  const Cir cir = generate_cir(s, p, ue, trp, true, stream);
  const double d = true_toa(ue, trp) * kSpeedOfLight;
  const double expected = std::llround(d / (kSpeedOfLight * p.tap_spacing)) * p.tap_spacing;
  CHECK(estimate_toa(cir, 20.0).toa == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tdoa_solve recovers the position from exact ToAs") {
  const Scenario s = build_scenario(ScenarioConfig{});
  const double ue_h = s.config.ue_height;

  auto solve_for = [&](const Position& ue) {
    std::vector<ToaMeasurement> toas;
    for (int j = 0; j < 18; ++j)
      toas.push_back({j, true_toa(ue, s.trp_positions[j]), true});
    return tdoa_solve(toas, s.trp_positions, 0, {60.0, 30.0}, ue_h);
  };

  const auto [x, y] = solve_for({42.0, 27.0, ue_h});
  CHECK(std::abs(x - 42.0) < 1e-6);
  CHECK(std::abs(y - 27.0) < 1e-6);

  // centroid with symmetric geometry
  const auto [cx, cy] = solve_for({60.0, 30.0, ue_h});
  CHECK(std::abs(cx - 60.0) < 1e-9);
  CHECK(std::abs(cy - 30.0) < 1e-9);

  RngStream stream(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Position ue = sample_ue_position_at(s, trial, 12);
    const auto [px, py] = solve_for(ue);
    CHECK(std::abs(px - ue.x) < 1e-6);
    CHECK(std::abs(py - ue.y) < 1e-6);
  }
}

TEST_CASE("tdoa_solve with 10 ns quantization stays in the expected band") {
  const Scenario s = build_scenario(ScenarioConfig{});
  const double ts = 10e-9;
  std::vector<double> errors;
  for (int trial = 0; trial < 1000; ++trial) {
    const Position ue = sample_ue_position_at(s, trial, 13);
    std::vector<ToaMeasurement> toas;
    for (int j = 0; j < 18; ++j) {
      const double t = true_toa(ue, s.trp_positions[j]);
      toas.push_back({j, std::round(t / ts) * ts, true});
    }
    const auto [x, y] = tdoa_solve(toas, s.trp_positions, 0, {60.0, 30.0}, ue.z);
    errors.push_back(horizontal_error(x, y, ue.x, ue.y));
  }
  CHECK(percentile(errors, 0.5) < 3.0);
}

TEST_CASE("tdoa_solve error paths") {
  const Scenario s = build_scenario(ScenarioConfig{});
  std::vector<ToaMeasurement> toas{{0, 1e-7, true}, {1, 1.1e-7, true}, {2, 0.9e-7, true}};
  CHECK_THROWS_AS(tdoa_solve(toas, s.trp_positions, 0, {60.0, 30.0}, 1.5), Error);
  CHECK_THROWS_AS(tdoa_solve(toas, s.trp_positions, 7, {60.0, 30.0}, 1.5), Error);
}

TEST_CASE("knn_fingerprint hand cases") {
  FingerprintDb db;
  for (int i = 0; i < 5; ++i) {
    FingerprintEntry e;
    e.rsrp = {-80.0 + i, -90.0 - i, -70.0 + 2 * i};
    e.x = 10.0 * i;
    e.y = 5.0 * i;
    db.entries.push_back(e);
  }

  // exact match, k=1
  const KnnResult one = knn_fingerprint(db, db.entries[3].rsrp, 1);
  CHECK(one.x == 30.0);
  CHECK(one.y == 15.0);
  CHECK_FALSE(one.k_clamped);

  // k = |db| gives the centroid
  const KnnResult all = knn_fingerprint(db, db.entries[0].rsrp, 5);
  CHECK(all.x == doctest::Approx(20.0));
  CHECK(all.y == doctest::Approx(10.0));

  // query between entries 1 and 2, k=2 -> midpoint
  std::vector<double> mid(3);
  for (int j = 0; j < 3; ++j) mid[j] = 0.5 * (db.entries[1].rsrp[j] + db.entries[2].rsrp[j]);
  const KnnResult two = knn_fingerprint(db, mid, 2);
  CHECK(two.x == doctest::Approx(15.0));
  CHECK(two.y == doctest::Approx(7.5));

  const KnnResult clamped = knn_fingerprint(db, mid, 99);
  CHECK(clamped.k_clamped);
  CHECK(clamped.x == doctest::Approx(20.0));

  CHECK_THROWS_AS(knn_fingerprint(FingerprintDb{}, mid, 1), Error);
}

TEST_CASE("knn output stays inside the convex hull of db positions (property)") {
  RngStream stream(14);
  FingerprintDb db;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int i = 0; i < 200; ++i) {
    FingerprintEntry e;
    e.rsrp = {stream.normal() * 10 - 80, stream.normal() * 10 - 80};
    e.x = 100.0 * stream.uniform();
    e.y = 50.0 * stream.uniform();
    xmin = std::min(xmin, e.x);
    xmax = std::max(xmax, e.x);
    ymin = std::min(ymin, e.y);
    ymax = std::max(ymax, e.y);
    db.entries.push_back(e);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> q{stream.normal() * 10 - 80, stream.normal() * 10 - 80};
    const KnnResult r = knn_fingerprint(db, q, 1 + stream.bounded(10));
    // mean of db points is certainly inside the bounding box; the convex-hull
    // property follows from the mean being a convex combination
    CHECK(r.x >= xmin);
    CHECK(r.x <= xmax);
    CHECK(r.y >= ymin);
    CHECK(r.y <= ymax);
  }
}
