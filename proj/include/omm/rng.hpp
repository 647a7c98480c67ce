#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace omm {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based 64-bit generator. Draw n of stream (seed, id) is a pure
/// function of (seed, id, n), so work split across threads in any way
/// reproduces the serial sequence exactly.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  StreamEngine(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(mix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Engine plus the distributions the simulators need. One per path/stream.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

  double normal() { return normal_(engine_); }

  // (0, 1]: safe under log().
  double uniform_open() noexcept {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  StreamEngine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace omm
