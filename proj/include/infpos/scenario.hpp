#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "infpos/rng.hpp"

namespace infpos {

// Indoor-factory geometry: a rectangular hall with a regular TRP grid above
// dense clutter and UEs on the floor below the clutter top.
struct ScenarioConfig {
  double hall_length = 120.0;  // m, x extent
  double hall_width = 60.0;    // m, y extent
  int trp_rows = 3;
  int trp_cols = 6;
  double trp_height = 8.0;      // m
  double ue_height = 1.5;       // m
  double clutter_density = 0.6;  // fraction of floor area covered
  double clutter_height = 6.0;   // m
  double clutter_size = 2.0;     // m, typical obstacle dimension
  double carrier_freq_ghz = 3.5;
  double tx_power_dbm = 23.0;

  // Throws Error(Errc::config) naming the offending field.
  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Position> trp_positions;          // row-major over the grid
  std::vector<std::array<double, 2>> hull;      // convex hull of TRP (x,y), CCW
};

// Deterministic: TRPs centered in an even grid (pitch hall_length/cols by
// hall_width/rows, half-pitch wall margin), hull from the projected sites.
Scenario build_scenario(const ScenarioConfig& config);

// Rejection sampling over the hull bounding box; sample i comes from its own
// substream so results do not depend on n or evaluation order.
std::vector<Position> sample_ue_positions(const Scenario& scenario, std::size_t n,
                                          std::uint64_t seed);

// Single draw for a given sample index (what sample_ue_positions produces at
// position `index`); lets parallel generators pull positions out of order.
Position sample_ue_position_at(const Scenario& scenario, std::size_t index,
                               std::uint64_t seed);

// Exponential clutter-shadowing LoS probability with elevated-BS correction:
// exp(-d_2d/k), k = -d_c/ln(1-r) * (h_bs - h_ue)/(h_c - h_ue).
double los_probability(double d_2d, const ScenarioConfig& config);

// True with probability p; consumes exactly one uniform draw.
bool draw_los_state(double p, RngStream& stream);

bool point_in_hull(const Scenario& scenario, double x, double y);

// Shoelace area of a simple polygon.
double polygon_area(const std::vector<std::array<double, 2>>& poly);

}  // namespace infpos
