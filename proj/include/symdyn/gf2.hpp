#pragma once

// Dense bit-packed linear algebra over F_2.

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "symdyn/error.hpp"

namespace symdyn::gf2 {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(std::size_t i, bool v = true) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) w_[i >> 6] |= m;
    else w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  BitVector& operator^=(const BitVector& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
    return *this;
  }
  bool any() const {
    for (auto x : w_)
      if (x) return true;
    return false;
  }
  /// Index of the lowest set bit at or after `from`, or size().
  std::size_t next_set(std::size_t from) const {
    if (from >= n_) return n_;
    std::size_t k = from >> 6;
    std::uint64_t cur = w_[k] & (~std::uint64_t{0} << (from & 63));
    while (true) {
      if (cur) {
        const std::size_t i = (k << 6) + static_cast<std::size_t>(std::countr_zero(cur));
        return i < n_ ? i : n_;
      }
      if (++k == w_.size()) return n_;
      cur = w_[k];
    }
  }
  /// Parity of the AND with `o`.
  bool dot(const BitVector& o) const {
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
    return std::popcount(acc) & 1;
  }
  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

/// Row-echelon result of eliminating a homogeneous system M x = 0.
struct Echelon {
  std::size_t cols = 0;
  std::vector<BitVector> rows;        ///< reduced rows; rows[i] has pivot pivots[i]
  std::vector<std::size_t> pivots;
  std::size_t rank() const { return rows.size(); }
  std::size_t kernel_dim() const { return cols - rows.size(); }
};

/// Reduced row echelon form; consumes the rows.
inline Echelon eliminate(std::vector<BitVector> rows, std::size_t cols) {
  Echelon e;
  e.cols = cols;
  std::vector<std::optional<std::size_t>> owner(cols);
  for (auto& r : rows) {
    if (r.size() != cols) throw InvalidArgument("gf2: row width mismatch");
    // Reduce against existing pivots in increasing pivot order.
    for (std::size_t c = r.next_set(0); c < cols; c = r.next_set(c + 1)) {
      if (owner[c]) r ^= e.rows[*owner[c]];
      else break;
    }
    const std::size_t p = r.next_set(0);
    if (p == cols) continue;
    for (std::size_t c = r.next_set(p + 1); c < cols; c = r.next_set(c + 1))
      if (owner[c]) r ^= e.rows[*owner[c]];
    // Clear column p from earlier rows to keep the form reduced.
    for (auto& q : e.rows)
      if (q.get(p)) q ^= r;
    owner[p] = e.rows.size();
    e.rows.push_back(std::move(r));
    e.pivots.push_back(p);
  }
  return e;
}

/// A solution of M x = 0 with prescribed values on the free (non-pivot)
/// columns: free[j] gives the value of the j-th free column in increasing order.
inline BitVector kernel_element(const Echelon& e, const std::vector<bool>& free_values) {
  BitVector x(e.cols);
  std::vector<bool> is_pivot(e.cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::size_t j = 0;
  for (std::size_t c = 0; c < e.cols; ++c)
    if (!is_pivot[c]) {
      if (j >= free_values.size()) throw InvalidArgument("gf2: too few free values");
      x.set(c, free_values[j++]);
    }
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    BitVector r = e.rows[i];
    r.set(e.pivots[i], false);
    x.set(e.pivots[i], r.dot(x));
  }
  return x;
}

}  // namespace symdyn::gf2
