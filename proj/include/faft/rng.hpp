#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace faft {

/// Philox4x32-10 counter-based generator. Streams are cheap to split by
/// (key, stream) and replay is exact for a given seed, independent of how
/// many worker threads consume sibling streams.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(key),
             static_cast<std::uint32_t>(key >> 32)} {
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (have_ == 0) {
      block_ = round10(ctr_, key_);
      advance();
      have_ = 2;
    }
    --have_;
    const int base = have_ * 2;
    return static_cast<std::uint64_t>(block_[base]) |
           (static_cast<std::uint64_t>(block_[base + 1]) << 32);
  }

  /// Uniform draw on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> round10(std::array<std::uint32_t, 4> c,
                                              std::array<std::uint32_t, 2> k) {
    for (int i = 0; i < 10; ++i) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
           static_cast<std::uint32_t>(p0)};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return c;
  }

  void advance() {
    if (++ctr_[0] == 0 && ++ctr_[1] == 0) ++ctr_[2];
  }

  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> block_{};
  std::array<std::uint32_t, 2> key_;
  int have_ = 0;
};

/// Standard normal draws via Box-Muller on a Philox stream.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t key, std::uint64_t stream = 0)
      : rng_(key, stream) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform01();
    const double u2 = rng_.uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Philox rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; used to derive stream keys from user seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Deterministic replication key: hash(seed, beta index, replication index).
inline std::uint64_t replication_key(std::uint64_t seed, std::uint64_t beta_index,
                                     std::uint64_t replication) {
  return mix64(mix64(mix64(seed) ^ beta_index) ^ replication);
}

}  // namespace faft
