#include "rolesim/rng.hpp"

#include <cmath>
#include <limits>

namespace rolesim {

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(a + 1));
  h = mix64(h ^ mix64((b + 1) << 1));
  h = mix64(h ^ mix64((c + 1) << 2));
  return h;
}

}  // namespace rolesim
