#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace omprip {

// splitmix64 finalizer (Vigna's public-domain reference mixer).  Used both as
// the generator step and as the seed-derivation hash so that every stream in
// the project is reproducible from a single documented primitive.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic sub-stream seeds: hash-chain the base seed with up to three
// labels.  Worker scheduling never touches this, so results are identical for
// any --jobs value.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

// Counter-based 64-bit generator: state walks an arithmetic sequence with the
// golden-gamma increment and each output is the splitmix64 hash of the
// counter.  Matches the published splitmix64 reference outputs, so ports in
// other languages can reproduce every stream bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) without modulo bias (rejection sampling).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via the Marsaglia polar method; the spare deviate is
  // cached so consecutive calls consume the stream deterministically.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // First k elements of a Fisher-Yates shuffle of {0, ..., d-1}, returned
  // in draw order (not sorted).  Uniform over k-subsets and over orderings.
  std::vector<std::size_t> sample_indices(std::size_t d, std::size_t k) {
    std::vector<std::size_t> pool(d);
    for (std::size_t i = 0; i < d; ++i) pool[i] = i;
    if (k > d) k = d;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(d - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace omprip
