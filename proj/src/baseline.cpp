#include "infpos/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infpos/error.hpp"

namespace infpos {

ToaMeasurement estimate_toa(const Cir& cir, double threshold_db_below_peak, int trp_index) {
  ToaMeasurement m;
  m.trp_index = trp_index;
  const Pdp pdp = cir_to_pdp(cir);
  const double peak = *std::max_element(pdp.powers.begin(), pdp.powers.end());
  if (!(peak > 0.0)) return m;  // invalid measurement
  const double cutoff = peak * std::pow(10.0, -threshold_db_below_peak / 10.0);
  for (std::size_t k = 0; k < pdp.powers.size(); ++k) {
    if (pdp.powers[k] >= cutoff) {
      m.toa = static_cast<double>(k) * cir.tap_spacing;
      m.valid = true;
      return m;
    }
  }
  return m;
}

std::pair<double, double> tdoa_solve(const std::vector<ToaMeasurement>& toas,
                                     const std::vector<Position>& trp_positions,
                                     int ref_index, std::pair<double, double> init_xy,
                                     double ue_height) {
  if (ref_index < 0 || ref_index >= static_cast<int>(toas.size()) ||
      !toas[ref_index].valid)
    throw Error(Errc::domain, "tdoa_solve: invalid reference measurement");

  struct Obs {
    double range_diff;  // c * (toa_j - toa_ref), meters
    const Position* trp;
  };
  std::vector<Obs> obs;
  for (std::size_t j = 0; j < toas.size(); ++j) {
    if (static_cast<int>(j) == ref_index || !toas[j].valid) continue;
    obs.push_back({kSpeedOfLight * (toas[j].toa - toas[ref_index].toa),
                   &trp_positions[toas[j].trp_index]});
  }
  if (obs.size() < 3)
    throw Error(Errc::no_fix, "tdoa_solve: need at least 3 valid non-reference ToAs");
  const Position& ref = trp_positions[toas[ref_index].trp_index];

  double x = init_xy.first, y = init_xy.second;
  auto dist = [ue_height](double px, double py, const Position& q) {
    const double dx = px - q.x, dy = py - q.y, dz = ue_height - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };

  double prev_step = std::numeric_limits<double>::infinity();
  int growth_streak = 0;
  for (int it = 0; it < 50; ++it) {
    const double dr = dist(x, y, ref);
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
    for (const auto& o : obs) {
      const double dj = dist(x, y, *o.trp);
      const double r = o.range_diff - (dj - dr);
      // d r / d p = -( (p - q_j)/d_j - (p - q_ref)/d_ref )
      const double gx = -((x - o.trp->x) / dj - (x - ref.x) / dr);
      const double gy = -((y - o.trp->y) / dj - (y - ref.y) / dr);
      jtj00 += gx * gx;
      jtj01 += gx * gy;
      jtj11 += gy * gy;
      jtr0 += gx * r;
      jtr1 += gy * r;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (!(std::abs(det) > 1e-300))
      throw Error(Errc::no_fix, "tdoa_solve: singular normal equations");
    const double sx = -(jtj11 * jtr0 - jtj01 * jtr1) / det;
    const double sy = -(-jtj01 * jtr0 + jtj00 * jtr1) / det;
    x += sx;
    y += sy;
    const double step = std::hypot(sx, sy);
    if (step < 1e-9) return {x, y};
    growth_streak = step > prev_step ? growth_streak + 1 : 0;
    if (growth_streak >= 8) throw Error(Errc::no_fix, "tdoa_solve: diverging iterates");
    prev_step = step;
  }
  return {x, y};
}

KnnResult knn_fingerprint(const FingerprintDb& db, const std::vector<double>& query,
                          std::size_t k) {
  if (db.entries.empty()) throw Error(Errc::data, "knn_fingerprint: empty database");
  if (k < 1) throw Error(Errc::domain, "knn_fingerprint: k must be >= 1");
  KnnResult res;
  if (k > db.entries.size()) {
    k = db.entries.size();
    res.k_clamped = true;
  }
  std::vector<std::pair<double, std::size_t>> dist(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const auto& e = db.entries[i];
    if (e.rsrp.size() != query.size())
      throw Error(Errc::data, "knn_fingerprint: vector length mismatch");
    double d2 = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double d = e.rsrp[j] - query[j];
      d2 += d * d;
    }
    dist[i] = {d2, i};  // index in the pair breaks ties toward lower ids
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sx += db.entries[dist[i].second].x;
    sy += db.entries[dist[i].second].y;
  }
  res.x = sx / static_cast<double>(k);
  res.y = sy / static_cast<double>(k);
  return res;
}

}  // namespace infpos
