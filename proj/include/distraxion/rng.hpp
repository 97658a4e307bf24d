#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace distraxion {

using Rng = std::mt19937_64;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One round of the splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Sub-seed for a named component: splitmix64(master ^ fnv1a64(tag)).
// Tags in use: "physics", "camera", "color", "background", "agent".
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double stddev) {
  if (stddev <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, stddev)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
  return std::uniform_int_distribution<int>(lo, hi_inclusive)(rng);
}

}  // namespace distraxion
