#include "ecodse/rng.hpp"

#include <cmath>

namespace ecodse {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

std::uint64_t seed_for(std::uint64_t root_seed, std::string_view component) {
  return mix_seed(root_seed, fnv1a64(component));
}

Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

double uniform01(Rng& rng) {
  // (0,1): never returns an exact endpoint, so log() stays finite.
  const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  return u;
}

double gumbel01(Rng& rng) { return -std::log(-std::log(uniform01(rng))); }

}  // namespace ecodse
