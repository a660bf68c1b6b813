#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace voxevo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Derives a stream seed from a master seed and a path of integer tags,
/// e.g. derive_seed(master, {generation, slot, purpose}). Pure function.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
}

}  // namespace voxevo
