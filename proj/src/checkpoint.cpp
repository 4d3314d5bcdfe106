#include <cstring>
#include <fstream>

#include "infpos/model.hpp"

namespace infpos::nn {

namespace {
constexpr char kMagic[4] = {'I', 'F', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(Errc::format_truncated, "checkpoint: unexpected end of file");
}
}  // namespace

void save_checkpoint(const std::string& path, const ModelArch& arch,
                     const std::vector<float>& flat) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io, "save_checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint32_t>(arch.in_channels));
  write_pod(os, static_cast<std::uint32_t>(arch.in_h));
  write_pod(os, static_cast<std::uint32_t>(arch.in_w));
  write_pod(os, static_cast<std::uint32_t>(arch.stem_channels));
  write_pod(os, static_cast<std::uint32_t>(arch.outputs));
  write_pod(os, static_cast<std::uint32_t>(arch.blocks.size()));
  for (const auto& b : arch.blocks) {
    write_pod(os, static_cast<std::uint32_t>(b.channels));
    write_pod(os, static_cast<std::uint32_t>(b.stride_w));
  }
  write_pod(os, static_cast<std::uint64_t>(flat.size()));
  os.write(reinterpret_cast<const char*>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(float)));
  if (!os) throw Error(Errc::io, "save_checkpoint: write failed for " + path);
}

std::pair<ModelArch, std::vector<float>> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, "load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(Errc::format_magic, "checkpoint: bad magic");
  std::uint32_t version;
  read_pod(is, version);
  if (version != kVersion)
    throw Error(Errc::format_version, "checkpoint: unsupported version");
  ModelArch arch;
  std::uint32_t v;
  read_pod(is, v); arch.in_channels = static_cast<int>(v);
  read_pod(is, v); arch.in_h = static_cast<int>(v);
  read_pod(is, v); arch.in_w = static_cast<int>(v);
  read_pod(is, v); arch.stem_channels = static_cast<int>(v);
  read_pod(is, v); arch.outputs = static_cast<int>(v);
  std::uint32_t n_blocks;
  read_pod(is, n_blocks);
  arch.blocks.clear();
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    std::uint32_t ch, st;
    read_pod(is, ch);
    read_pod(is, st);
    arch.blocks.push_back({static_cast<int>(ch), static_cast<int>(st)});
  }
  std::uint64_t count;
  read_pod(is, count);
  std::vector<float> flat(count);
  is.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!is) throw Error(Errc::format_truncated, "checkpoint: truncated parameters");
  return {arch, std::move(flat)};
}

}  // namespace infpos::nn
