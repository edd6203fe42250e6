#pragma once

#include <cstdint>
#include <random>

namespace bbl {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream seed for (seed, stream). Used for counter-based block
// seeding so results do not depend on how work is split across threads.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Van der Corput radical inverse of index in the given base, in [0,1).
double radical_inverse(std::uint64_t index, unsigned base);

// Coordinate `dim` (0-based, < 16) of the Halton point with the given index.
double halton(std::uint64_t index, int dim);

}  // namespace bbl
