#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace bcfeed {

// splitmix64 finisher; full avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based generator: the whole value sequence is a pure function of
// (seed, stream, index), so sample `index` of a stream is identical no matter
// how work is split across threads or chunks.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : state_(mix64(mix64(mix64(seed) ^ stream) ^ index)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never 0, so log() is safe.
  double next_u01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Circularly-symmetric complex normal with unit variance:
  // real and imaginary parts are independent N(0, 1/2).
  std::complex<double> next_cn() {
    const double u1 = next_u01();
    const double u2 = (static_cast<double>(next_u64() >> 11)) * 0x1.0p-53;
    const double r = std::sqrt(-std::log(u1));
    const double th = 2.0 * M_PI * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

 private:
  std::uint64_t state_;
};

// Stream ids: callers use small consecutive ids; the library derives auxiliary
// streams by flipping the top bit so they never collide with caller streams.
inline std::uint64_t aux_stream(std::uint64_t stream) {
  return stream ^ 0x8000000000000000ull;
}

}  // namespace bcfeed
