#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

namespace gosp::bits {

using Words = std::vector<std::uint64_t>;

inline std::size_t words_for(std::size_t nbits) { return (nbits + 63) / 64; }

inline bool test(const Words& w, std::size_t i) { return (w[i >> 6] >> (i & 63)) & 1ULL; }
inline void set(Words& w, std::size_t i) { w[i >> 6] |= 1ULL << (i & 63); }

inline bool any(const Words& w) {
  for (auto x : w)
    if (x) return true;
  return false;
}

inline std::size_t count(const Words& w) {
  std::size_t c = 0;
  for (auto x : w) c += static_cast<std::size_t>(std::popcount(x));
  return c;
}

// dst bit (i + shift) |= src bit i, for all i with 0 <= i + shift < 64 * n.
inline void or_shifted(std::uint64_t* dst, const std::uint64_t* src, std::size_t n,
                       std::int64_t shift) {
  if (shift >= 0) {
    auto ws = static_cast<std::size_t>(shift >> 6);
    unsigned bs = static_cast<unsigned>(shift & 63);
    if (ws >= n) return;
    if (bs == 0) {
      for (std::size_t i = ws; i < n; ++i) dst[i] |= src[i - ws];
    } else {
      dst[ws] |= src[0] << bs;
      for (std::size_t i = ws + 1; i < n; ++i)
        dst[i] |= (src[i - ws] << bs) | (src[i - ws - 1] >> (64 - bs));
    }
  } else {
    auto s = static_cast<std::uint64_t>(-shift);
    auto ws = static_cast<std::size_t>(s >> 6);
    unsigned bs = static_cast<unsigned>(s & 63);
    if (ws >= n) return;
    std::size_t m = n - ws;
    if (bs == 0) {
      for (std::size_t i = 0; i < m; ++i) dst[i] |= src[i + ws];
    } else {
      for (std::size_t i = 0; i + 1 < m; ++i)
        dst[i] |= (src[i + ws] >> bs) | (src[i + ws + 1] << (64 - bs));
      dst[m - 1] |= src[n - 1] >> bs;
    }
  }
}

// Mask of bit positions [a, b) within word w.
inline std::uint64_t range_mask(std::size_t a, std::size_t b, std::size_t w) {
  std::size_t lo = w * 64, hi = lo + 64;
  if (b <= lo || a >= hi) return 0;
  std::uint64_t m = ~0ULL;
  if (a > lo) m &= ~0ULL << (a - lo);
  if (b < hi) m &= ~0ULL >> (hi - b);
  return m;
}

// Index of the first / last set bit, or npos.
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
inline std::size_t first_set(const Words& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(w[i]));
  return npos;
}
inline std::size_t last_set(const Words& w) {
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i]) return i * 64 + 63 - static_cast<std::size_t>(std::countl_zero(w[i]));
  return npos;
}

template <class Fn>
inline void for_each_set(const Words& w, Fn&& fn) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::uint64_t x = w[i];
    while (x) {
      fn(i * 64 + static_cast<std::size_t>(std::countr_zero(x)));
      x &= x - 1;
    }
  }
}

}  // namespace gosp::bits

namespace gosp::bits {

// Bits [q, q + 64) of src (n words), zero outside; q may be negative.
inline std::uint64_t extract64(const std::uint64_t* src, std::size_t n, std::int64_t q) {
  auto get = [&](std::int64_t w) -> std::uint64_t {
    return (w < 0 || static_cast<std::size_t>(w) >= n) ? 0 : src[w];
  };
  std::int64_t w = q >= 0 ? q / 64 : -((-q + 63) / 64);
  unsigned b = static_cast<unsigned>(q - w * 64);
  if (b == 0) return get(w);
  return (get(w) >> b) | (get(w + 1) << (64 - b));
}

// dst = src shifted so that src bit i lands on dst bit i + shift (sizes may differ).
inline void copy_shifted(Words& dst, const Words& src, std::int64_t shift) {
  for (std::size_t j = 0; j < dst.size(); ++j)
    dst[j] = extract64(src.data(), src.size(), static_cast<std::int64_t>(j) * 64 - shift);
}

}  // namespace gosp::bits
