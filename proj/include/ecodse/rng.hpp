#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ecodse {

using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Derives a component generator seed from the run's root seed. Components are
/// keyed by name so adding one never shifts another component's stream.
std::uint64_t seed_for(std::uint64_t root_seed, std::string_view component);

Rng make_rng(std::uint64_t seed);

/// Uniform draw in the open interval (0, 1).
double uniform01(Rng& rng);

/// Standard Gumbel(0,1) draw, -log(-log(u)).
double gumbel01(Rng& rng);

}  // namespace ecodse
