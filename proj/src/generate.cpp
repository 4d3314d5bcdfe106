#include "infpos/generate.hpp"

#include <algorithm>
#include <thread>

#include "infpos/error.hpp"

namespace infpos {

Dataset generate_dataset(const Scenario& scenario, const ChannelParams& params,
                         std::size_t count, std::uint64_t master_seed, int workers) {
  if (workers < 1) throw Error(Errc::config, "generate_dataset: workers must be >= 1");
  params.validate();
  Dataset d;
  d.trp_count = static_cast<std::uint32_t>(scenario.trp_positions.size());
  d.tap_count = static_cast<std::uint32_t>(params.tap_count);
  d.tap_spacing = params.tap_spacing;
  d.records.resize(count);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Position ue = sample_ue_position_at(scenario, i, master_seed);
      d.records[i] = generate_record(scenario, params, ue, i, master_seed);
    }
  };

  if (workers == 1 || count < 2) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(count, w * chunk);
      const std::size_t end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return d;
}

}  // namespace infpos
