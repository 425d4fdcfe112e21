#pragma once

#include <cstdint>

namespace rwave {

// Counter-based draws: sample i of stream `seed` is a pure function of
// (seed, i), so randomized scenarios reproduce bit-for-bit across platforms
// and across parallel consumers.  (The std:: distributions are
// implementation-defined, which would break artifact determinism.)

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Sample `index` of stream `seed`, uniform in [0, 1) with 53 random bits.
double uniform01(std::uint64_t seed, std::uint64_t index);

double uniform_in(std::uint64_t seed, std::uint64_t index, double lo, double hi);

}  // namespace rwave
