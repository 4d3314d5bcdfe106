#pragma once

#include <cstdint>

#include "infpos/dataset.hpp"
#include "infpos/scenario.hpp"

namespace infpos {

// Generates `count` records. Record i's UE position and channels come from
// counter-based substreams of `master_seed`, so the output is byte-identical
// for any worker count.
Dataset generate_dataset(const Scenario& scenario, const ChannelParams& params,
                         std::size_t count, std::uint64_t master_seed, int workers = 1);

}  // namespace infpos
