#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <Eigen/Core>

namespace locpower {

// Philox4x32-10 counter-based generator. A stream is fully determined by
// (key, counter words 1..3); word 0 counts 128-bit blocks within the stream,
// so independent trials get independent, reproducible substreams.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0u, substream, static_cast<std::uint32_t>(stream),
             static_cast<std::uint32_t>(stream >> 32)} {}

  result_type operator()() {
    if (pos_ == 4) {
      out_ = bijection(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return out_[pos_++];
  }

  /// The raw keyed bijection; exposed for known-answer testing.
  static Block bijection(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  Key key_;
  Block ctr_;
  Block out_{};
  int pos_ = 4;
};

/// Uniform double in [0, 1) with 53 random bits.
template <typename Engine>
double uniform01(Engine& eng) {
  const std::uint64_t hi = eng();
  const std::uint64_t lo = eng();
  return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
}

template <typename Engine>
double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

template <typename Engine>
Eigen::Vector2d uniform_in_square(Engine& eng, const Eigen::Vector2d& center, double side) {
  const double h = side / 2;
  const double x = uniform(eng, center.x() - h, center.x() + h);
  const double y = uniform(eng, center.y() - h, center.y() + h);
  return {x, y};
}

/// Uniform point in the closed disc of the given radius.
template <typename Engine>
Eigen::Vector2d uniform_in_disc(Engine& eng, const Eigen::Vector2d& center, double radius) {
  const double r = radius * std::sqrt(uniform01(eng));
  const double a = 2 * std::numbers::pi * uniform01(eng);
  return center + r * Eigen::Vector2d(std::cos(a), std::sin(a));
}

}  // namespace locpower
