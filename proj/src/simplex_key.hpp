#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "cechstat/cech.hpp"

namespace cechstat::detail {

struct SimplexKey {
  std::array<std::uint32_t, kMaxSimplexVertices> v{};
  std::uint8_t count = 0;
  bool operator==(const SimplexKey&) const = default;

  static SimplexKey of(const FilteredSimplex& s) noexcept {
    SimplexKey k;
    k.v = s.v;
    k.count = s.count;
    for (std::size_t i = s.count; i < kMaxSimplexVertices; ++i) k.v[i] = 0;
    return k;
  }
};

struct SimplexKeyHash {
  std::size_t operator()(const SimplexKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ k.count;
    for (std::size_t i = 0; i < k.count; ++i) {
      h ^= k.v[i];
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace cechstat::detail
