#pragma once

#include <cstdint>
#include <random>

namespace iesim {

using Rng = std::mt19937_64;

// Substream seeds are splitmix64(root + (stream + 1) * golden gamma). The same
// rule is applied recursively for nested streams (replica, then component).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace iesim
