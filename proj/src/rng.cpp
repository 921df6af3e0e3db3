#include "rmtlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace rmtlab {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) + kGamma * (stream + 1));
}
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(derive_key(seed, stream)) {}

CounterRng::CounterRng(std::uint64_t seed, Stream stream, std::uint64_t substream) noexcept
    : key_(derive_key(derive_key(seed, static_cast<std::uint64_t>(stream)), substream)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + kGamma * counter_);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() noexcept {
  return (static_cast<double>(operator()() >> 12) + 0.5) * 0x1.0p-52;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = operator()();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = operator()();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

bool CounterRng::bernoulli(double probability) noexcept {
  if (probability <= 0.0) return false;
  if (probability >= 1.0) return true;
  return uniform() < probability;
}

CounterRng CounterRng::split(std::uint64_t substream) const noexcept {
  return CounterRng(derive_key(key_, substream), 0, true);
}

}  // namespace rmtlab
