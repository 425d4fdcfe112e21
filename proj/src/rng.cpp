#include "rwave/rng.hpp"

namespace rwave {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t index) {
  // the splitmix64 sequence for `seed`, indexed directly
  std::uint64_t state = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  return static_cast<double>(mix64(state) >> 11) * 0x1.0p-53;
}

double uniform_in(std::uint64_t seed, std::uint64_t index, double lo, double hi) {
  return lo + (hi - lo) * uniform01(seed, index);
}

}  // namespace rwave
