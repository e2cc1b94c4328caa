#pragma once

#include <cstdint>
#include <vector>

namespace treecorr {

// Counter-based splittable random stream. Every draw is a pure function of
// (key, counter), so generation order does not matter and parallel producers
// keyed off the same seed never interleave state.
namespace rng_detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace rng_detail

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(rng_detail::mix64(seed + rng_detail::kGolden)) {}

  // Derives an independent child stream; fold() calls commute with nothing,
  // the order of fold arguments defines the stream identity.
  RandomStream fold(std::uint64_t word) const {
    RandomStream child(*this);
    child.key_ = rng_detail::mix64(child.key_ ^ rng_detail::mix64(word + rng_detail::kGolden));
    return child;
  }

  std::uint64_t bits(std::uint64_t counter) const {
    return rng_detail::mix64(key_ + counter * rng_detail::kGolden);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) via 128-bit multiply-high.
  std::uint32_t below(std::uint64_t counter, std::uint32_t bound) const {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(bits(counter)) * static_cast<unsigned __int128>(bound);
    return static_cast<std::uint32_t>(prod >> 64);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Fisher-Yates permutation of [0, n) driven by a dedicated stream.
inline std::vector<std::uint32_t> random_permutation(std::uint32_t n, const RandomStream& stream) {
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  for (std::uint32_t i = n; i > 1; --i) {
    const std::uint32_t j = stream.below(i, i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace treecorr
