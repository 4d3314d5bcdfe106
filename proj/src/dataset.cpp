#include "infpos/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "infpos/error.hpp"
#include "infpos/rng.hpp"

namespace infpos {

void NormalizationSpec::validate() const {
  if (!(rsrp_min_dbm < rsrp_max_dbm))
    throw Error(Errc::config, "normalization.rsrp_min_dbm: must be < rsrp_max_dbm");
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(Errc::config, "split.test_fraction: must lie in (0,1)");
  if (!(validation_fraction_of_train > 0.0 && validation_fraction_of_train < 1.0))
    throw Error(Errc::config, "split.validation_fraction_of_train: must lie in (0,1)");
}

InputTensor assemble_input(const DatasetRecord& record, const NormalizationSpec& norm) {
  norm.validate();
  const int n_trp = static_cast<int>(record.cir.size());
  const int n_tap = n_trp > 0 ? static_cast<int>(record.cir[0].taps.size()) : 0;
  InputTensor t;
  t.rows = 2 * n_trp;
  t.taps = n_tap;
  t.values.assign(static_cast<std::size_t>(t.rows) * n_tap * 2, 0.0f);

  double max_mag = 0.0;
  for (const auto& cir : record.cir) {
    for (const auto& tap : cir.taps) {
      if (!std::isfinite(tap.real()) || !std::isfinite(tap.imag()))
        throw Error(Errc::data, "assemble_input: non-finite CIR tap");
      max_mag = std::max(max_mag, static_cast<double>(std::abs(std::complex<double>(
                                      tap.real(), tap.imag()))));
    }
  }
  const double inv_scale = max_mag > 0.0 ? 1.0 / max_mag : 0.0;
  const double rsrp_span = norm.rsrp_max_dbm - norm.rsrp_min_dbm;

  for (int j = 0; j < n_trp; ++j) {
    const auto& taps = record.cir[j].taps;
    for (int k = 0; k < n_tap; ++k) {
      t.at(2 * j, k, 0) = static_cast<float>(taps[k].real() * inv_scale);
      t.at(2 * j, k, 1) = static_cast<float>(taps[k].imag() * inv_scale);
    }
    if (!std::isfinite(record.rsrp[j]))
      throw Error(Errc::data, "assemble_input: non-finite RSRP");
    double r = (record.rsrp[j] - norm.rsrp_min_dbm) / rsrp_span;
    r = std::clamp(r, 0.0, 1.0);
    const float rf = static_cast<float>(r);
    for (int k = 0; k < n_tap; ++k) {
      t.at(2 * j + 1, k, 0) = rf;
      t.at(2 * j + 1, k, 1) = rf;
    }
  }
  return t;
}

Splits split_dataset(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 10) throw Error(Errc::config, "split_dataset: need at least 10 records");
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  RngStream stream = substream(spec.seed, 0, 0, rng_purpose::kSplit);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(stream.bounded(i + 1));
    std::swap(ids[i], ids[j]);
  }
  const std::size_t n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.test_fraction));
  const std::size_t n_train = n - n_test;
  const std::size_t n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_train) * spec.validation_fraction_of_train));
  if (n_test == 0 || n_val == 0 || n_val >= n_train)
    throw Error(Errc::config, "split_dataset: fractions produce an empty split");

  Splits s;
  s.test.assign(ids.begin(), ids.begin() + n_test);
  s.validation.assign(ids.begin() + n_test, ids.begin() + n_test + n_val);
  s.fit.assign(ids.begin() + n_test + n_val, ids.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.fit.begin(), s.fit.end());
  return s;
}

Dataset reduce_inputs(const Dataset& dataset, const std::vector<int>& trp_subset,
                      int tap_count, double tx_power_dbm) {
  if (trp_subset.empty())
    throw Error(Errc::config, "reduce_inputs: TRP subset must be non-empty");
  if (tap_count < 1 || tap_count > static_cast<int>(dataset.tap_count))
    throw Error(Errc::config, "reduce_inputs: tap_count out of range");
  for (int j : trp_subset) {
    if (j < 0 || j >= static_cast<int>(dataset.trp_count))
      throw Error(Errc::config, "reduce_inputs: TRP index out of range");
  }
  Dataset out;
  out.trp_count = static_cast<std::uint32_t>(trp_subset.size());
  out.tap_count = static_cast<std::uint32_t>(tap_count);
  out.tap_spacing = dataset.tap_spacing;
  out.records.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) {
    DatasetRecord r;
    r.ue_x = rec.ue_x;
    r.ue_y = rec.ue_y;
    for (int j : trp_subset) {
      Cir cir;
      cir.tap_spacing = rec.cir[j].tap_spacing;
      cir.taps.assign(rec.cir[j].taps.begin(), rec.cir[j].taps.begin() + tap_count);
      r.rsrp.push_back(static_cast<float>(compute_rsrp(cir, tx_power_dbm)));
      r.cir.push_back(std::move(cir));
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'I', 'F', 'P', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v, Errc code = Errc::format_truncated) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(code, "dataset file: unexpected end of file");
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io, "save_dataset: cannot open " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint64_t>(dataset.records.size()));
  write_pod(os, dataset.trp_count);
  write_pod(os, dataset.tap_count);
  std::vector<float> buf;
  for (const auto& rec : dataset.records) {
    write_pod(os, rec.ue_x);
    write_pod(os, rec.ue_y);
    for (std::uint32_t j = 0; j < dataset.trp_count; ++j) {
      write_pod(os, rec.rsrp[j]);
      buf.resize(2 * dataset.tap_count);
      for (std::uint32_t k = 0; k < dataset.tap_count; ++k) {
        buf[2 * k] = rec.cir[j].taps[k].real();
        buf[2 * k + 1] = rec.cir[j].taps[k].imag();
      }
      os.write(reinterpret_cast<const char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
  }
  if (!os) throw Error(Errc::io, "save_dataset: write failed for " + path);
}

namespace {

DatasetHeader read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(Errc::format_magic, "dataset file: bad magic");
  DatasetHeader h{};
  read_pod(is, h.version);
  if (h.version != kVersion)
    throw Error(Errc::format_version,
                "dataset file: unsupported version " + std::to_string(h.version));
  read_pod(is, h.record_count);
  read_pod(is, h.trp_count);
  read_pod(is, h.tap_count);
  if (h.trp_count == 0 || h.tap_count == 0)
    throw Error(Errc::format_count, "dataset file: zero trp_count or tap_count");
  return h;
}

}  // namespace

DatasetHeader read_dataset_header(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, "read_dataset_header: cannot open " + path);
  return read_header(is);
}

Dataset load_dataset(const std::string& path, double tap_spacing) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, "load_dataset: cannot open " + path);
  is.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(is.tellg());
  is.seekg(0);
  const DatasetHeader h = read_header(is);

  const std::uint64_t record_bytes =
      8ull + static_cast<std::uint64_t>(h.trp_count) * (4ull + 8ull * h.tap_count);
  const std::uint64_t expected = 24ull + h.record_count * record_bytes;
  if (file_size < expected)
    throw Error(Errc::format_truncated, "dataset file: truncated payload");
  if (file_size > expected)
    throw Error(Errc::format_count, "dataset file: payload larger than header count");

  Dataset d;
  d.trp_count = h.trp_count;
  d.tap_count = h.tap_count;
  d.tap_spacing = tap_spacing;
  d.records.resize(h.record_count);
  std::vector<float> buf(2 * h.tap_count);
  for (auto& rec : d.records) {
    read_pod(is, rec.ue_x);
    read_pod(is, rec.ue_y);
    rec.cir.resize(h.trp_count);
    rec.rsrp.resize(h.trp_count);
    for (std::uint32_t j = 0; j < h.trp_count; ++j) {
      read_pod(is, rec.rsrp[j]);
      is.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
      if (!is) throw Error(Errc::format_truncated, "dataset file: truncated record");
      rec.cir[j].tap_spacing = tap_spacing;
      rec.cir[j].taps.resize(h.tap_count);
      for (std::uint32_t k = 0; k < h.tap_count; ++k)
        rec.cir[j].taps[k] = std::complex<float>(buf[2 * k], buf[2 * k + 1]);
    }
  }
  return d;
}

}  // namespace infpos
