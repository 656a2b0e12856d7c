#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lavdm/types.hpp"

namespace lavdm {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, substream). Identical arguments
/// always yield an identical sequence, so trials can run in any order.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

/// 64-bit seed for (seed, stream, substream), for APIs that take a seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

/// k distinct indices drawn uniformly from [0, n), returned in draw order.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng);

}  // namespace lavdm
