#ifndef TSG_RNG_HPP
#define TSG_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tsg {

// Counter-based 64-bit generator. Word j of a stream is a pure function of
// (key, j): the splitmix64 finalizer applied to key + (j+1)*GAMMA. Replaying
// a stream therefore needs no stored state, which is what makes feature
// blocks regenerable from (base_seed, iteration_index) alone.
//
// Uniforms take the top 53 bits; Gaussians use the Box-Muller transform on
// consecutive word pairs. Cross-language bit-exactness is not a goal;
// within-build determinism is.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Stream key for (seed, stream_id). mix is a bijection, so distinct
  // stream ids give distinct keys under a fixed seed.
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
    return mix(seed ^ mix(stream_id + kGamma));
  }

  std::uint64_t word(std::uint64_t j) const {
    return mix(key_ + (j + 1) * kGamma);
  }

  // Uniform on [0, 1).
  double uniform01(std::uint64_t j) const {
    return static_cast<double>(word(j) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); never 0, safe under log().
  double uniform_open01(std::uint64_t j) const {
    return (static_cast<double>(word(j) >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Sequential view over a CounterRng stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : rng_(key) {}

  std::uint64_t next_word() { return rng_.word(pos_++); }
  double next_uniform01() { return rng_.uniform01(pos_++); }

  // Standard normal via Box-Muller; consumes two words per pair and caches
  // the second variate.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform_open01(pos_++);
    const double u2 = rng_.uniform01(pos_++);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in [0, n); modulo bias is irrelevant here, determinism is
  // the contract.
  std::uint32_t next_index(std::uint32_t n) {
    return static_cast<std::uint32_t>(next_word() % n);
  }

 private:
  CounterRng rng_;
  std::uint64_t pos_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tsg

#endif
