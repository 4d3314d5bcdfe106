#include "infpos/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infpos/error.hpp"

namespace infpos {

namespace {

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain, CCW output, collinear points dropped.
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<std::array<double, 2>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(Errc::config, "scenario." + field + ": " + why);
  };
  if (!(hall_length > 0.0)) fail("hall_length", "must be > 0");
  if (!(hall_width > 0.0)) fail("hall_width", "must be > 0");
  if (trp_rows < 1) fail("trp_rows", "must be >= 1");
  if (trp_cols < 1) fail("trp_cols", "must be >= 1");
  if (!(clutter_density > 0.0 && clutter_density < 1.0))
    fail("clutter_density", "must lie in (0,1)");
  if (!(clutter_size > 0.0)) fail("clutter_size", "must be > 0");
  if (!(ue_height < clutter_height && clutter_height < trp_height))
    fail("trp_height", "height ordering ue_height < clutter_height < trp_height required");
  if (!(carrier_freq_ghz > 0.0)) fail("carrier_freq_ghz", "must be > 0");
}

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  const double pitch_x = config.hall_length / config.trp_cols;
  const double pitch_y = config.hall_width / config.trp_rows;
  for (int r = 0; r < config.trp_rows; ++r) {
    for (int c = 0; c < config.trp_cols; ++c) {
      Position p;
      p.x = pitch_x * (c + 0.5);
      p.y = pitch_y * (r + 0.5);
      p.z = config.trp_height;
      s.trp_positions.push_back(p);
    }
  }
  std::vector<std::array<double, 2>> xy;
  xy.reserve(s.trp_positions.size());
  for (const auto& p : s.trp_positions) xy.push_back({p.x, p.y});
  s.hull = convex_hull(std::move(xy));
  return s;
}

bool point_in_hull(const Scenario& scenario, double x, double y) {
  const auto& h = scenario.hull;
  const std::size_t n = h.size();
  if (n < 3) return false;
  // Convex, CCW: inside iff never strictly right of an edge.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % n];
    if (cross(a, b, {x, y}) < 0.0) return false;
  }
  return true;
}

double polygon_area(const std::vector<std::array<double, 2>>& poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    acc += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(acc);
}

Position sample_ue_position_at(const Scenario& scenario, std::size_t index,
                               std::uint64_t seed) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& v : scenario.hull) {
    xmin = std::min(xmin, v[0]);
    xmax = std::max(xmax, v[0]);
    ymin = std::min(ymin, v[1]);
    ymax = std::max(ymax, v[1]);
  }
  RngStream stream = substream(seed, index, 0, rng_purpose::kUePosition);
  Position p;
  p.z = scenario.config.ue_height;
  do {
    p.x = xmin + stream.uniform() * (xmax - xmin);
    p.y = ymin + stream.uniform() * (ymax - ymin);
  } while (!point_in_hull(scenario, p.x, p.y));
  return p;
}

std::vector<Position> sample_ue_positions(const Scenario& scenario, std::size_t n,
                                          std::uint64_t seed) {
  std::vector<Position> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_ue_position_at(scenario, i, seed));
  return out;
}

double los_probability(double d_2d, const ScenarioConfig& config) {
  config.validate();
  if (d_2d < 0.0) throw Error(Errc::domain, "los_probability: d_2d must be >= 0");
  const double k = -config.clutter_size / std::log(1.0 - config.clutter_density) *
                   (config.trp_height - config.ue_height) /
                   (config.clutter_height - config.ue_height);
  return std::exp(-d_2d / k);
}

bool draw_los_state(double p, RngStream& stream) {
  return stream.uniform() < p;
}

}  // namespace infpos
