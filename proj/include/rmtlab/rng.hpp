#pragma once

#include <cstdint>
#include <limits>

namespace rmtlab {

/// Stream identifiers used to split one experiment seed into independent
/// RNG streams. Keep these stable: they are part of the reproducibility
/// contract of every persisted result.
enum class Stream : std::uint64_t {
  Graph = 1,
  Goe = 2,
  Flow = 3,
  Direction = 4,
  Signs = 5,
  MonteCarlo = 6,
  Synthetic = 7,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based 64-bit generator (SplitMix64 output function applied to
/// key + counter * golden-gamma). The output for a given (key, counter) pair
/// is fixed, so streams can be split and advanced without coordination and
/// results are identical across platforms.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  bool bernoulli(double probability) noexcept;
  double rademacher() noexcept { return (operator()() >> 63) ? 1.0 : -1.0; }

  /// Independent child stream; does not advance this generator.
  CounterRng split(std::uint64_t substream) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept {
    counter_ = counter;
    has_spare_ = false;
  }

 private:
  CounterRng(std::uint64_t key, std::uint64_t counter, bool) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rmtlab
