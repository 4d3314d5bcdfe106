#pragma once

#include <utility>
#include <vector>

#include "infpos/channel.hpp"
#include "infpos/scenario.hpp"

namespace infpos {

struct ToaMeasurement {
  int trp_index = -1;
  double toa = 0.0;  // seconds
  bool valid = false;
};

struct FingerprintEntry {
  std::vector<double> rsrp;  // dBm
  double x = 0.0;
  double y = 0.0;
};

struct FingerprintDb {
  std::vector<FingerprintEntry> entries;
};

struct KnnResult {
  double x = 0.0;
  double y = 0.0;
  bool k_clamped = false;  // requested k exceeded the database size
};

// First tap whose power is within threshold_db_below_peak of the peak.
ToaMeasurement estimate_toa(const Cir& cir, double threshold_db_below_peak,
                            int trp_index = -1);

// Gauss-Newton fit of the planar position (z fixed at ue_height) to the
// range differences c*(toa_j - toa_ref). Initialized at init_xy; at most 50
// iterations, stops when the step norm drops below 1e-9 m.
std::pair<double, double> tdoa_solve(const std::vector<ToaMeasurement>& toas,
                                     const std::vector<Position>& trp_positions,
                                     int ref_index, std::pair<double, double> init_xy,
                                     double ue_height);

// Mean position of the k nearest entries in dB space; ties broken by lower
// entry index. k larger than the database is clamped.
KnnResult knn_fingerprint(const FingerprintDb& db, const std::vector<double>& query,
                          std::size_t k);

}  // namespace infpos
