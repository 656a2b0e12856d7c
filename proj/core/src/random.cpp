#include "lavdm/random.hpp"

#include <cmath>
#include <numeric>

#include "lavdm/errors.hpp"

namespace lavdm {

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  Rng rng = make_rng(seed, stream, substream);
  return rng();
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; avoids the implementation-defined
  // std::uniform_real_distribution so streams are portable.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // Marsaglia polar method.
  for (;;) {
    const double x = 2.0 * uniform01(rng) - 1.0;
    const double y = 2.0 * uniform01(rng) - 1.0;
    const double s = x * x + y * y;
    if (s > 0.0 && s < 1.0) {
      return x * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  if (k < 0 || k > n) {
    throw Error(ErrorKind::InvalidArgument, "cannot draw " + std::to_string(k) +
                                                " distinct indices from " + std::to_string(n));
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  // Partial Fisher-Yates.
  for (Index i = 0; i < k; ++i) {
    const auto span = static_cast<std::uint64_t>(n - i);
    const auto j = i + static_cast<Index>(rng() % span);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace lavdm
