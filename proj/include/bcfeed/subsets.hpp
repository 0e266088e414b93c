#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace bcfeed {

// User subsets are K-bit masks: user k (1-based) <-> bit k-1.
using Mask = std::uint32_t;

inline constexpr int kMaxUsers = 20;  // bounds 2^K tables

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask full_mask(int users) { return (Mask{1} << users) - 1; }

inline Mask user_bit(int k) { return Mask{1} << (k - 1); }

// Lowest-numbered user in a nonempty mask (1-based).
inline int min_user(Mask m) { return std::countr_zero(m) + 1; }

// Enumerates all submasks of `set` (including 0 and `set` itself) into a vector,
// in decreasing numeric order except for the trailing 0.
inline std::vector<Mask> submasks(Mask set) {
  std::vector<Mask> out;
  Mask s = set;
  while (true) {
    out.push_back(s);
    if (s == 0) break;
    s = (s - 1) & set;
  }
  return out;
}

// n choose k as double (exact for the small n used here).
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace bcfeed
