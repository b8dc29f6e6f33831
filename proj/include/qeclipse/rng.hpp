#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qeclipse::rng {

// splitmix64 finalizer; bijective avalanche on 64 bits
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stateless child-seed derivation. Disjoint index streams from one master
// seed, so work items can run in any order (or in parallel) and still draw
// identical randomness.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix(mix(master) ^ mix(index + 0xD1B54A32D192ED03ull));
}

// Deterministic generator: the mt19937_64 stream is pinned by the C++
// standard, and the uniform/normal transforms below are spelled out here
// instead of using std distributions (whose output is implementation
// defined). Normals come from the classical Box-Muller transform, pairs
// cached, consumed in call order.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qeclipse::rng
