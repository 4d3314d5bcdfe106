#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infpos/channel.hpp"

namespace infpos {

struct Dataset {
  std::uint32_t trp_count = 18;
  std::uint32_t tap_count = kDefaultTapCount;
  double tap_spacing = 10e-9;  // not persisted; format carries tap_count only
  std::vector<DatasetRecord> records;
};

struct NormalizationSpec {
  // CIR real/imag are scaled by the per-record maximum tap magnitude across
  // all TRPs; RSRP maps linearly from [rsrp_min, rsrp_max] dBm to [0,1].
  double rsrp_min_dbm = -140.0;
  double rsrp_max_dbm = -40.0;

  void validate() const;
};

// Interleaved model input: row 2t is the normalized CIR of TRP t (re, im per
// tap); row 2t+1 is a constant plane holding TRP t's normalized RSRP.
struct InputTensor {
  int rows = 0;  // 2 * trp_count
  int taps = 0;
  std::vector<float> values;  // [row][tap][2]

  float& at(int r, int k, int c) { return values[(static_cast<std::size_t>(r) * taps + k) * 2 + c]; }
  float at(int r, int k, int c) const {
    return values[(static_cast<std::size_t>(r) * taps + k) * 2 + c];
  }
};

struct SplitSpec {
  double test_fraction = 0.02;
  double validation_fraction_of_train = 0.20;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Splits {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

InputTensor assemble_input(const DatasetRecord& record, const NormalizationSpec& norm);

// Deterministic shuffle of [0, n); |test| = round(n*test_fraction),
// |validation| = round(|train|*validation_fraction_of_train), fit the rest.
// Ids within each split are sorted ascending.
Splits split_dataset(std::size_t n, const SplitSpec& spec);

// Keeps the selected TRPs, truncates CIRs to the first tap_count taps, and
// recomputes RSRP from the truncated CIR so the RSRP invariant still holds.
Dataset reduce_inputs(const Dataset& dataset, const std::vector<int>& trp_subset,
                      int tap_count, double tx_power_dbm);

// Little-endian binary format:
//   "IFPD", u32 version=1, u64 record_count, u32 trp_count, u32 tap_count;
//   per record: f32 ue_x, f32 ue_y; per TRP: f32 rsrp, tap_count x (f32 re, f32 im).
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path, double tap_spacing = 10e-9);

// Header-only read (record_count, trp_count, tap_count) for `info`.
struct DatasetHeader {
  std::uint32_t version;
  std::uint64_t record_count;
  std::uint32_t trp_count;
  std::uint32_t tap_count;
};
DatasetHeader read_dataset_header(const std::string& path);

}  // namespace infpos
