#ifndef SMVR_CORE_RNG_HPP
#define SMVR_CORE_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace smvr {

// Thin wrapper around mt19937_64 so every component draws from an explicit
// stream instead of hidden global state. Substreams are derived by mixing the
// base seed with a stream id, which keeps parallel runs independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step on (seed, stream) to decorrelate nearby seeds
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::mt19937_64& engine() { return engine_; }

  // Uniform integer in [0, n) without modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double gaussian() {
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
  }

  // k distinct indices from [0, n), k <= n. Order is the draw order.
  std::vector<std::int32_t> sample_without_replacement(std::int64_t n, std::int64_t k) {
    std::vector<std::int32_t> out;
    out.reserve(static_cast<std::size_t>(k));
    if (2 * k >= n) {
      // partial Fisher-Yates over the full index range
      std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
      for (std::int64_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
      }
    } else {
      // rejection; fast when k << n
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      while (static_cast<std::int64_t>(out.size()) < k) {
        const auto idx = static_cast<std::int32_t>(uniform_index(static_cast<std::uint64_t>(n)));
        if (!seen[static_cast<std::size_t>(idx)]) {
          seen[static_cast<std::size_t>(idx)] = true;
          out.push_back(idx);
        }
      }
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smvr

#endif
