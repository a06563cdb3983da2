#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace rain {

// Counter-free splitmix64 core. Hand-rolled so that streams are fully
// specified and bit-reproducible across platforms and standard libraries.
class Rng {
 public:
  Rng() : state_(0x9e3779b97f4a7c15ull) {}
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Named substream derived from a master seed. Distinct names give
  // decorrelated streams, so toggling e.g. the attack model does not
  // perturb target trajectories drawn from another stream.
  Rng(uint64_t master_seed, std::string_view stream_name) {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : stream_name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    state_ = mix(master_seed ^ h);
    (void)next_u64();
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  // Standard normal via Box-Muller (spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // k distinct indices drawn uniformly from [0, n), ascending order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rain
