#pragma once

#include "xxz/core.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xxz {

// Bitmasks fit one machine word up to this chain length.
inline constexpr int max_chain_length = 24;

// A z-product state: bit j set <=> spin j up.
struct SpinConfig {
  std::uint32_t bits = 0;
  int length = 0;
  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

inline double sz_at(SpinConfig config, int site) {
  if (site < 0 || site >= config.length)
    throw std::invalid_argument("sz_at: site " + std::to_string(site) + " outside chain of length " +
                                std::to_string(config.length));
  return ((config.bits >> site) & 1u) ? 0.5 : -0.5;
}

namespace detail {
// Gosper's hack: next-larger integer with the same popcount.
inline std::uint32_t next_bit_permutation(std::uint32_t v) {
  const std::uint32_t t = v | (v - 1);
  return (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
}
}  // namespace detail

// States of a fixed total-magnetization subspace, ascending by bitmask value.
class SectorBasis {
 public:
  SectorBasis(int length, int two_m) : length_(length), two_m_(two_m) {
    if (length < 1 || length > max_chain_length)
      throw std::invalid_argument("SectorBasis: length must be in [1, " + std::to_string(max_chain_length) + "]");
    if (two_m < -length || two_m > length || ((two_m + length) % 2) != 0)
      throw std::invalid_argument("SectorBasis: 2M = " + std::to_string(two_m) +
                                  " incompatible with length " + std::to_string(length));
    const int n_up = (length + two_m) / 2;
    if (n_up == 0) {
      states_.push_back(0);
      return;
    }
    const std::uint32_t top = std::uint32_t{1} << length;
    std::uint32_t v = (std::uint32_t{1} << n_up) - 1;
    while (v < top) {
      states_.push_back(v);
      v = detail::next_bit_permutation(v);
    }
  }

  int length() const { return length_; }
  int two_m() const { return two_m_; }
  Index size() const { return static_cast<Index>(states_.size()); }
  std::uint32_t bits(Index k) const { return states_[static_cast<std::size_t>(k)]; }
  SpinConfig state(Index k) const { return {bits(k), length_}; }
  const std::vector<std::uint32_t>& states() const { return states_; }

  Index index_of(SpinConfig config) const {
    const auto it = std::lower_bound(states_.begin(), states_.end(), config.bits);
    if (config.length != length_ || it == states_.end() || *it != config.bits)
      throw std::out_of_range("SectorBasis: configuration not in sector");
    return static_cast<Index>(it - states_.begin());
  }

 private:
  int length_;
  int two_m_;
  std::vector<std::uint32_t> states_;
};

inline SectorBasis enumerate_sector(int length, int two_m) { return SectorBasis(length, two_m); }

inline Index index_of(const SectorBasis& basis, SpinConfig config) { return basis.index_of(config); }

// Largest sector: zero magnetization for even chains, +1/2 for odd ones.
inline int default_two_m(int length) { return (length % 2 == 0) ? 0 : 1; }

}  // namespace xxz
