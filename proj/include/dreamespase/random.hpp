#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dreamespase {

/// The one random engine used everywhere. Streams are always owned by the caller.
using Rng = std::mt19937_64;

/// Stable 64-bit hash of a label (FNV-1a); independent of the standard library.
std::uint64_t stable_hash(std::string_view label) noexcept;

/// Derives a sub-seed from a master seed and a task label (e.g. "replicate/3").
/// Identical inputs give identical seeds on every platform and thread count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept;

inline Rng make_rng(std::uint64_t master, std::string_view label) {
  return Rng(derive_seed(master, label));
}

}  // namespace dreamespase
