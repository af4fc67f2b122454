// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_RNG_HPP
#define EPINFER_RNG_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace epinfer {

// SplitMix64 step: advances the state and returns a mixed output word.
// Used for seeding and for hash finalisation of stream labels.
inline std::uint64_t splitmix64(std::uint64_t &state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ 1.0 by Blackman and Vigna, seeded through SplitMix64 so any
// 64-bit value yields a well mixed full state. Satisfies the C++ named
// requirement UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto &word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_oc() noexcept {
    return static_cast<double>((operator()() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer on {0, ..., n - 1} for n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // Standard normal via the Marsaglia polar method. The spare deviate is
  // discarded so consumption is independent of call pairing.
  double normal() noexcept {
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    return u * std::sqrt(-2.0 * std::log(r2) / r2);
  }

  // Exponential with the given rate, drawn as -log(U) / rate with U in (0, 1].
  double exponential(double rate) noexcept {
    return -std::log(uniform_oc()) / rate;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Samples Binomial(n, p). Delegates to the standard library distribution;
// draws are reproducible for a fixed engine state on a fixed platform.
std::int64_t binomial_draw(std::int64_t n, double p, Xoshiro256pp &engine);

// Hierarchical stream labels. A stream is identified by a 64-bit key derived
// from the master seed and the chain of (role, index...) refinements that led
// to it, so the engine handed to any unit of work depends only on that
// label path and never on scheduling order. Collisions between distinct
// paths are as likely as collisions of a 64-bit hash.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed) noexcept
      : key_(mix(master_seed)) {}

  RngStream child(std::string_view role) const noexcept {
    return RngStream(absorb(absorb_key(role), nullptr, 0), 0);
  }

  RngStream child(std::string_view role, std::uint64_t a) const noexcept {
    const std::uint64_t args[] = {a};
    return RngStream(absorb(absorb_key(role), args, 1), 0);
  }

  RngStream child(std::string_view role, std::uint64_t a,
                  std::uint64_t b) const noexcept {
    const std::uint64_t args[] = {a, b};
    return RngStream(absorb(absorb_key(role), args, 2), 0);
  }

  std::uint64_t key() const noexcept { return key_; }

  Xoshiro256pp engine() const noexcept { return Xoshiro256pp(key_); }

 private:
  RngStream(std::uint64_t key, int) noexcept : key_(key) {}

  std::uint64_t absorb_key(std::string_view role) const noexcept {
    std::uint64_t h = fnv_offset;
    h = fnv_bytes(h, &key_, sizeof key_);
    h = fnv_bytes(h, role.data(), role.size());
    return h;
  }

  static std::uint64_t absorb(std::uint64_t h, const std::uint64_t *args,
                              int n) noexcept {
    for (int i = 0; i < n; ++i) h = fnv_bytes(h, &args[i], sizeof args[i]);
    return mix(h);
  }

  static std::uint64_t fnv_bytes(std::uint64_t h, const void *data,
                                 std::size_t n) noexcept {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= fnv_prime;
    }
    return h;
  }

  static std::uint64_t mix(std::uint64_t x) noexcept {
    std::uint64_t s = x;
    return splitmix64(s);
  }

  static constexpr std::uint64_t fnv_offset = 14695981039346656037ull;
  static constexpr std::uint64_t fnv_prime = 1099511628211ull;

  std::uint64_t key_;
};

}  // namespace epinfer

#endif  // EPINFER_RNG_HPP
