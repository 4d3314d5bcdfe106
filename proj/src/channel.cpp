#include "infpos/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infpos/error.hpp"

namespace infpos {

namespace {

double dist3(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double dist2(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

void ChannelParams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(Errc::config, "channel." + field + ": " + why);
  };
  if (!(pl_los_slope > 0.0)) fail("pl_los_slope", "must be > 0");
  if (!(pl_nlos_slope > 0.0)) fail("pl_nlos_slope", "must be > 0");
  if (shadow_sigma_los < 0.0) fail("shadow_sigma_los", "must be >= 0");
  if (shadow_sigma_nlos < 0.0) fail("shadow_sigma_nlos", "must be >= 0");
  if (!(rms_delay_spread_los > 0.0)) fail("rms_delay_spread_los", "must be > 0");
  if (!(rms_delay_spread_nlos > 0.0)) fail("rms_delay_spread_nlos", "must be > 0");
  if (n_paths < 1) fail("n_paths", "must be >= 1");
  if (!(tap_spacing > 0.0)) fail("tap_spacing", "must be > 0");
  if (tap_count < 1) fail("tap_count", "must be >= 1");
}

double path_loss_db(double d_3d, bool los, const ChannelParams& params, double freq_ghz) {
  if (d_3d < 1.0) throw Error(Errc::domain, "path_loss_db: d_3d must be >= 1 m");
  const double fterm = 20.0 * std::log10(freq_ghz);
  const double pl_los = params.pl_los_intercept + params.pl_los_slope * std::log10(d_3d) + fterm;
  if (los) return pl_los;
  const double pl_nlos =
      params.pl_nlos_intercept + params.pl_nlos_slope * std::log10(d_3d) + fterm;
  return std::max(pl_nlos, pl_los);
}

Cir generate_cir(const Scenario& scenario, const ChannelParams& params, const Position& ue,
                 const Position& trp, bool los, RngStream& stream) {
  const double d3 = std::max(dist3(ue, trp), 1.0);
  const int first_tap =
      static_cast<int>(std::llround(d3 / (kSpeedOfLight * params.tap_spacing)));
  if (first_tap >= params.tap_count)
    throw Error(Errc::domain, "generate_cir: first arrival beyond CIR window");

  const double pl = path_loss_db(d3, los, params, scenario.config.carrier_freq_ghz);
  const double sigma = los ? params.shadow_sigma_los : params.shadow_sigma_nlos;
  const double shadow_db = sigma * stream.normal();
  const double target_energy = std::pow(10.0, -(pl + shadow_db) / 10.0);
  const double ds = los ? params.rms_delay_spread_los : params.rms_delay_spread_nlos;

  std::vector<std::complex<double>> acc(params.tap_count, 0.0);
  double scatter_fraction = 1.0;
  if (los) {
    const double k_lin = std::pow(10.0, params.rician_k_db / 10.0);
    scatter_fraction = 1.0 / (k_lin + 1.0);
    acc[first_tap] += std::sqrt(k_lin / (k_lin + 1.0));  // deterministic dominant tap
  }

  struct ScatterPath {
    double tau, weight, g_re, g_im;
  };
  std::vector<ScatterPath> paths(params.n_paths);
  double weight_sum = 0.0;
  for (int i = 0; i < params.n_paths; ++i) {
    double tau = stream.exponential(ds);
    // NLoS pins path 0 to zero excess delay so the first arrival is present.
    if (!los && i == 0) tau = 0.0;
    double g_re, g_im;
    stream.normal_pair(g_re, g_im);
    paths[i] = {tau, std::exp(-tau / ds), g_re, g_im};
    weight_sum += paths[i].weight;
  }
  for (const auto& p : paths) {
    const int idx = first_tap + static_cast<int>(std::llround(p.tau / params.tap_spacing));
    if (idx >= params.tap_count) continue;
    const double amp = std::sqrt(scatter_fraction * p.weight / weight_sum * 0.5);
    acc[idx] += std::complex<double>(amp * p.g_re, amp * p.g_im);
  }

  double realized = 0.0;
  for (const auto& t : acc) realized += std::norm(t);
  // realized > 0: LoS keeps the deterministic tap, NLoS keeps path 0 at the
  // first-arrival index (zero gain has probability zero; guard regardless).
  if (!(realized > 0.0))
    throw Error(Errc::numeric, "generate_cir: degenerate all-zero realization");
  const double scale = std::sqrt(target_energy / realized);

  Cir cir;
  cir.tap_spacing = params.tap_spacing;
  cir.taps.resize(params.tap_count);
  for (int k = 0; k < params.tap_count; ++k) {
    cir.taps[k] = std::complex<float>(static_cast<float>(acc[k].real() * scale),
                                      static_cast<float>(acc[k].imag() * scale));
  }
  return cir;
}

double compute_rsrp(const Cir& cir, double tx_power_dbm) {
  double energy = 0.0;
  for (const auto& t : cir.taps) {
    energy += static_cast<double>(t.real()) * t.real() +
              static_cast<double>(t.imag()) * t.imag();
  }
  if (!(energy > 0.0)) throw Error(Errc::data, "compute_rsrp: all-zero CIR");
  return tx_power_dbm + 10.0 * std::log10(energy);
}

Pdp cir_to_pdp(const Cir& cir) {
  Pdp pdp;
  pdp.powers.reserve(cir.taps.size());
  for (const auto& t : cir.taps) {
    pdp.powers.push_back(static_cast<double>(t.real()) * t.real() +
                         static_cast<double>(t.imag()) * t.imag());
  }
  return pdp;
}

DelayProfile cir_to_dp(const Cir& cir, double threshold_db_below_peak) {
  if (threshold_db_below_peak < 0.0)
    throw Error(Errc::domain, "cir_to_dp: threshold must be >= 0 dB");
  const Pdp pdp = cir_to_pdp(cir);
  const double peak = *std::max_element(pdp.powers.begin(), pdp.powers.end());
  if (!(peak > 0.0)) throw Error(Errc::data, "cir_to_dp: all-zero CIR");
  const double cutoff = peak * std::pow(10.0, -threshold_db_below_peak / 10.0);
  DelayProfile dp;
  for (std::size_t k = 0; k < pdp.powers.size(); ++k) {
    if (pdp.powers[k] >= cutoff)
      dp.delays.emplace_back(static_cast<int>(k), static_cast<double>(k) * cir.tap_spacing);
  }
  return dp;
}

DatasetRecord generate_record(const Scenario& scenario, const ChannelParams& params,
                              const Position& ue, std::uint64_t record_index,
                              std::uint64_t master_seed) {
  DatasetRecord rec;
  rec.ue_x = static_cast<float>(ue.x);
  rec.ue_y = static_cast<float>(ue.y);
  const std::size_t n_trp = scenario.trp_positions.size();
  rec.cir.reserve(n_trp);
  rec.rsrp.reserve(n_trp);
  for (std::size_t j = 0; j < n_trp; ++j) {
    const Position& trp = scenario.trp_positions[j];
    RngStream los_stream = substream(master_seed, record_index, j, rng_purpose::kLosDraw);
    const bool los = draw_los_state(los_probability(dist2(ue, trp), scenario.config), los_stream);
    RngStream link_stream = substream(master_seed, record_index, j, rng_purpose::kLink);
    Cir cir = generate_cir(scenario, params, ue, trp, los, link_stream);
    const float rsrp = static_cast<float>(compute_rsrp(cir, scenario.config.tx_power_dbm));
    rec.cir.push_back(std::move(cir));
    rec.rsrp.push_back(rsrp);
  }
  return rec;
}

}  // namespace infpos
