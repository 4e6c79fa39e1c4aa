#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metato {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed of a named substream of a root seed. Every random consumer in the
// library derives its engine through here so components stay independently
// reproducible.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(root, name, index));
}

}  // namespace metato
