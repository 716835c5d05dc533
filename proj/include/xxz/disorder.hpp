#pragma once

#include <cstdint>
#include <vector>

namespace xxz {

// SplitMix64: tiny counter-based generator with platform-independent output.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [-1, 1]: u / 2^63 - 1.
  double next_symmetric() { return static_cast<double>(next()) * 0x1p-63 - 1.0; }

 private:
  std::uint64_t state_;
};

struct DisorderRealization {
  std::vector<double> fields;  // one local field per site, each in [-1, 1]
  std::uint64_t seed = 0;
};

inline DisorderRealization sample_disorder(std::uint64_t seed, int length) {
  DisorderRealization r;
  r.seed = seed;
  r.fields.reserve(static_cast<std::size_t>(length));
  SplitMix64 rng(seed);
  for (int j = 0; j < length; ++j) r.fields.push_back(rng.next_symmetric());
  return r;
}

// Stable 64-bit mixer for deriving per-realization seeds from integer labels.
inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t salt) {
  std::uint64_t z = h + 0x9e3779b97f4a7c15ull * (salt + 0x632be59bd9b4e019ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace xxz
