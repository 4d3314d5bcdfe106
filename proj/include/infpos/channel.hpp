#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "infpos/rng.hpp"
#include "infpos/scenario.hpp"

namespace infpos {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr int kDefaultTapCount = 256;

// Tapped-delay-line generator parameters. Path loss is ABC-form
// (intercept + slope*log10(d) + 20*log10(f_GHz)); the multipath profile is
// exponential in delay and power with circularly symmetric complex gains.
struct ChannelParams {
  double pl_los_intercept = 31.84;
  double pl_los_slope = 21.5;
  double pl_nlos_intercept = 33.63;
  double pl_nlos_slope = 21.9;
  double shadow_sigma_los = 4.3;    // dB
  double shadow_sigma_nlos = 7.2;   // dB
  double rician_k_db = 7.0;         // LoS dominant-tap factor
  double rms_delay_spread_los = 15e-9;   // s
  double rms_delay_spread_nlos = 30e-9;  // s
  int n_paths = 24;                 // scattered paths per link
  double tap_spacing = 10e-9;       // s
  int tap_count = kDefaultTapCount;

  void validate() const;
};

// Complex baseband impulse response. Taps carry absolute amplitudes (path
// loss and shadowing included), so received power is a pure function of the
// stored taps.
struct Cir {
  std::vector<std::complex<float>> taps;
  double tap_spacing = 10e-9;
};

struct Pdp {
  std::vector<double> powers;  // |tap|^2, linear
};

struct DelayProfile {
  std::vector<std::pair<int, double>> delays;  // (tap index, seconds), ascending
};

struct DatasetRecord {
  float ue_x = 0.0f;
  float ue_y = 0.0f;
  std::vector<Cir> cir;     // one per TRP
  std::vector<float> rsrp;  // dBm, one per TRP
};

double path_loss_db(double d_3d, bool los, const ChannelParams& params, double freq_ghz);

// Synthesizes one link. First arrival lands at round(d_3d/(c*Ts)); total tap
// energy is normalized to 10^(-(PL+shadow)/10) exactly. Consumes: 1 normal
// (shadow), then per scattered path 1 exponential + 1 normal pair.
Cir generate_cir(const Scenario& scenario, const ChannelParams& params, const Position& ue,
                 const Position& trp, bool los, RngStream& stream);

// tx_power + 10*log10(sum |taps|^2), dBm.
double compute_rsrp(const Cir& cir, double tx_power_dbm);

Pdp cir_to_pdp(const Cir& cir);

// Taps within threshold_db_below_peak of the peak power.
DelayProfile cir_to_dp(const Cir& cir, double threshold_db_below_peak);

// One dataset row: LoS draw + CIR + RSRP for every TRP, each from its own
// (master_seed, record_index, trp_index) substream.
DatasetRecord generate_record(const Scenario& scenario, const ChannelParams& params,
                              const Position& ue, std::uint64_t record_index,
                              std::uint64_t master_seed);

}  // namespace infpos
