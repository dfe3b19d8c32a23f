#pragma once

#include <cstdint>
#include <random>

namespace minr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the parameter stream owned by image `image_id` under a run seed.
// Separate SIRENs and MINR per-image stores draw from the same streams.
inline std::uint64_t image_seed(std::uint64_t seed, std::uint64_t image_id) {
  return splitmix64(seed ^ splitmix64(image_id + 1));
}

inline std::uint64_t shared_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x6a09e667f3bcc908ULL); }

// Stream for coordinate sampling, disjoint from parameter streams.
inline std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t image_id) {
  return splitmix64(image_seed(seed, image_id) ^ 0xbb67ae8584caa73bULL);
}

// mt19937_64 is fully specified by the standard; the distribution helpers
// below avoid the implementation-defined std:: distributions so streams are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [0, n) by rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace minr
