#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pumpfit {

using Rng = std::mt19937_64;

/// Seed for the named sub-stream `stream` of a run seed. Distinct names give
/// statistically independent streams; the mapping is fixed across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

/// Seed for the `index`-th element of a stream (per-call noise, per-row draws).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace pumpfit
