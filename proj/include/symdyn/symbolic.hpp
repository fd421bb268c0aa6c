#pragma once

// Symbols, windows, patterns and configurations over the integers, with the
// shift action and the finite-scale checks built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symdyn/error.hpp"

namespace symdyn {

using Symbol = std::uint8_t;
using Position = std::int64_t;

/// Floor modulus: result in [0, m).
inline Position floor_mod(Position a, Position m) {
  Position r = a % m;
  return r < 0 ? r + m : r;
}

inline Position floor_div(Position a, Position m) {
  return (a - floor_mod(a, m)) / m;
}

/// Cyclic group Z/size used as the symbol set.
class Alphabet {
 public:
  explicit Alphabet(int size) : size_(size) {
    if (size < 2 || size > 10)
      throw InvalidArgument("alphabet size must lie in [2, 10], got " +
                            std::to_string(size));
  }
  int size() const { return size_; }
  bool contains(int s) const { return s >= 0 && s < size_; }
  Symbol add(Symbol a, Symbol b) const {
    return static_cast<Symbol>((a + b) % size_);
  }
  Symbol neg(Symbol a) const {
    return static_cast<Symbol>((size_ - a) % size_);
  }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  int size_;
};

/// Finite sorted set of distinct positions.
class Window {
 public:
  Window() = default;
  explicit Window(std::vector<Position> positions) : pos_(std::move(positions)) {
    std::sort(pos_.begin(), pos_.end());
    pos_.erase(std::unique(pos_.begin(), pos_.end()), pos_.end());
  }
  /// The interval [lo, hi) (empty when hi <= lo).
  static Window interval(Position lo, Position hi) {
    std::vector<Position> p;
    for (Position g = lo; g < hi; ++g) p.push_back(g);
    return Window(std::move(p));
  }

  const std::vector<Position>& positions() const { return pos_; }
  std::size_t size() const { return pos_.size(); }
  bool empty() const { return pos_.empty(); }
  bool contains(Position g) const {
    return std::binary_search(pos_.begin(), pos_.end(), g);
  }
  Position min() const { return pos_.front(); }
  Position max() const { return pos_.back(); }
  /// True iff the window is {lo, lo+1, ..., hi}.
  bool contiguous() const {
    return pos_.empty() || max() - min() + 1 == static_cast<Position>(size());
  }
  bool symmetric() const {
    return std::all_of(pos_.begin(), pos_.end(),
                       [&](Position g) { return contains(-g); });
  }
  Window translate(Position g) const {
    std::vector<Position> p = pos_;
    for (auto& x : p) x += g;
    return Window(std::move(p));
  }
  /// Elementwise sum set {a + b : a in this, b in other}.
  Window minkowski_sum(const Window& other) const {
    std::vector<Position> p;
    p.reserve(size() * other.size());
    for (Position a : pos_)
      for (Position b : other.pos_) p.push_back(a + b);
    return Window(std::move(p));
  }
  Window negate() const {
    std::vector<Position> p = pos_;
    for (auto& x : p) x = -x;
    return Window(std::move(p));
  }

  auto begin() const { return pos_.begin(); }
  auto end() const { return pos_.end(); }
  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<Position> pos_;
};

/// Symbols on a window, stored in window order.
class Pattern {
 public:
  Pattern(Alphabet alphabet, Window window, std::vector<Symbol> symbols)
      : alphabet_(alphabet), window_(std::move(window)), sym_(std::move(symbols)) {
    if (sym_.size() != window_.size())
      throw InvalidArgument("pattern: symbol count does not match window size");
    for (Symbol s : sym_)
      if (!alphabet_.contains(s))
        throw InvalidArgument("pattern: symbol outside alphabet");
  }

  /// Parses a digit string onto the window [offset, offset + len).
  static Pattern from_digits(Alphabet alphabet, std::string_view digits,
                             Position offset = 0) {
    std::vector<Symbol> s;
    s.reserve(digits.size());
    for (char c : digits) {
      if (c < '0' || c > '9' || !alphabet.contains(c - '0'))
        throw InvalidArgument("pattern: bad digit '" + std::string(1, c) +
                              "' for alphabet of size " +
                              std::to_string(alphabet.size()));
      s.push_back(static_cast<Symbol>(c - '0'));
    }
    const auto len = static_cast<Position>(s.size());
    return Pattern(alphabet, Window::interval(offset, offset + len), std::move(s));
  }

  static Pattern zero(Alphabet alphabet, Window window) {
    std::vector<Symbol> s(window.size(), 0);
    return Pattern(alphabet, std::move(window), std::move(s));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const Window& window() const { return window_; }
  const std::vector<Symbol>& symbols() const { return sym_; }
  std::size_t size() const { return sym_.size(); }

  Symbol at(Position g) const {
    auto it = std::lower_bound(window_.begin(), window_.end(), g);
    if (it == window_.end() || *it != g)
      throw InvalidArgument("pattern: position " + std::to_string(g) +
                            " outside window");
    return sym_[static_cast<std::size_t>(it - window_.begin())];
  }

  /// Symbols in window order as a digit string.
  std::string digits() const {
    std::string out;
    out.reserve(sym_.size());
    for (Symbol s : sym_) out.push_back(static_cast<char>('0' + s));
    return out;
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend bool operator<(const Pattern& a, const Pattern& b) {
    if (a.window_.positions() != b.window_.positions())
      return a.window_.positions() < b.window_.positions();
    return a.sym_ < b.sym_;
  }

 private:
  Alphabet alphabet_;
  Window window_;
  std::vector<Symbol> sym_;
};

/// Pointwise sum of two patterns on the same window, mod the alphabet size.
inline Pattern pointwise_sum(const Pattern& u, const Pattern& v) {
  if (!(u.alphabet() == v.alphabet()))
    throw InvalidArgument("pointwise_sum: alphabet mismatch");
  if (!(u.window() == v.window()))
    throw InvalidArgument("pointwise_sum: window mismatch");
  std::vector<Symbol> s(u.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = u.alphabet().add(u.symbols()[i], v.symbols()[i]);
  return Pattern(u.alphabet(), u.window(), std::move(s));
}

/// A point of A^Z given by a periodic base and a finite patch. The base value
/// at h is fundamental[h mod period]; patch entries override it. Every
/// configuration of this class is eventually periodic, which keeps all the
/// "for every g" checks below decidable.
class Configuration {
 public:
  Configuration(Alphabet alphabet, std::vector<Symbol> fundamental,
                std::map<Position, Symbol> patch = {})
      : alphabet_(alphabet), fund_(std::move(fundamental)), patch_(std::move(patch)) {
    if (fund_.empty())
      throw InvalidArgument("configuration: empty fundamental domain");
    for (Symbol s : fund_)
      if (!alphabet_.contains(s))
        throw InvalidArgument("configuration: symbol outside alphabet");
    for (auto& [g, s] : patch_)
      if (!alphabet_.contains(s))
        throw InvalidArgument("configuration: patch symbol outside alphabet");
  }

  static Configuration constant(Alphabet alphabet, Symbol s) {
    return Configuration(alphabet, {s});
  }
  static Configuration periodic(const Pattern& block) {
    return Configuration(block.alphabet(), block.symbols());
  }

  const Alphabet& alphabet() const { return alphabet_; }
  Position period() const { return static_cast<Position>(fund_.size()); }
  const std::vector<Symbol>& fundamental() const { return fund_; }
  const std::map<Position, Symbol>& patch() const { return patch_; }

  Symbol base_at(Position h) const {
    return fund_[static_cast<std::size_t>(floor_mod(h, period()))];
  }
  Symbol at(Position h) const {
    auto it = patch_.find(h);
    return it != patch_.end() ? it->second : base_at(h);
  }

  /// Smallest closed interval containing every patch position, if any.
  std::optional<std::pair<Position, Position>> patch_hull() const {
    if (patch_.empty()) return std::nullopt;
    return std::make_pair(patch_.begin()->first, patch_.rbegin()->first);
  }

  /// Same point with patch entries that agree with the base removed.
  Configuration normalized() const {
    std::map<Position, Symbol> p;
    for (auto& [g, s] : patch_)
      if (s != base_at(g)) p.emplace(g, s);
    return Configuration(alphabet_, fund_, std::move(p));
  }

  Configuration with_patch(const std::map<Position, Symbol>& extra) const {
    auto p = patch_;
    for (auto& [g, s] : extra) p[g] = s;
    return Configuration(alphabet_, fund_, std::move(p));
  }

 private:
  Alphabet alphabet_;
  std::vector<Symbol> fund_;
  std::map<Position, Symbol> patch_;
};

/// Left shift: shift(x, g) evaluated at h equals x evaluated at h - g.
inline Configuration shift(const Configuration& x, Position g) {
  const Position p = x.period();
  std::vector<Symbol> f(static_cast<std::size_t>(p));
  for (Position i = 0; i < p; ++i)
    f[static_cast<std::size_t>(i)] = x.base_at(i - g);
  std::map<Position, Symbol> patch;
  for (auto& [h, s] : x.patch()) patch.emplace(h + g, s);
  return Configuration(x.alphabet(), std::move(f), std::move(patch));
}

inline Pattern restrict_to(const Configuration& x, const Window& F) {
  std::vector<Symbol> s;
  s.reserve(F.size());
  for (Position g : F) s.push_back(x.at(g));
  return Pattern(x.alphabet(), F, std::move(s));
}

/// Reads a pattern back into a configuration: the pattern's symbols become a
/// patch over the constant `fill` configuration.
inline Configuration embed(const Pattern& p, Symbol fill = 0) {
  std::map<Position, Symbol> patch;
  for (std::size_t i = 0; i < p.size(); ++i)
    patch.emplace(p.window().positions()[i], p.symbols()[i]);
  return Configuration(p.alphabet(), {fill}, std::move(patch));
}

namespace detail {

inline Position checked_lcm(Position a, Position b) {
  const Position l = std::lcm(a, b);
  if (l <= 0 || l > (Position{1} << 32))
    throw ResourceError("period lcm too large");
  return l;
}

// Range of positions beyond which both configurations are purely periodic
// with common period L: every difference outside [lo, hi] repeats with L.
inline std::pair<Position, Position> joint_hull(const Configuration& x,
                                                const Configuration& y) {
  Position lo = 0, hi = 0;
  bool any = false;
  for (const auto* c : {&x, &y}) {
    if (auto h = c->patch_hull()) {
      lo = any ? std::min(lo, h->first) : h->first;
      hi = any ? std::max(hi, h->second) : h->second;
      any = true;
    }
  }
  return {lo, hi};
}

}  // namespace detail

/// d(x, y) = 2^-m with m the least |g| where x and y differ; 0 when equal.
/// Exact on this representation class.
inline double distance(const Configuration& x, const Configuration& y) {
  const Position L = detail::checked_lcm(x.period(), y.period());
  auto [lo, hi] = detail::joint_hull(x, y);
  const Position horizon = std::max(std::abs(lo), std::abs(hi)) + L;
  for (Position m = 0; m <= horizon; ++m) {
    if (x.at(m) != y.at(m) || x.at(-m) != y.at(-m))
      return std::ldexp(1.0, static_cast<int>(-std::min<Position>(m, 1074)));
  }
  return 0.0;
}

/// Boundary of F with respect to S: all g such that S + g meets both F and
/// its complement. S must be symmetric and contain 0.
inline Window boundary(const Window& F, const Window& S) {
  if (!S.contains(0) || !S.symmetric())
    throw InvalidArgument("boundary: S must be symmetric and contain 0");
  std::vector<Position> out;
  // g qualifies only if some s + g lies in F, i.e. g in F - S.
  for (Position f : F)
    for (Position s : S) {
      const Position g = f - s;
      bool outside = false;
      for (Position t : S)
        if (!F.contains(t + g)) {
          outside = true;
          break;
        }
      if (outside) out.push_back(g);
    }
  return Window(std::move(out));
}

/// Largest (F, delta)-separated subset of a family of patterns on a common
/// window F. Two points whose restrictions to F differ at some f are
/// separated at every delta <= 1: shifting f to the origin puts the
/// disagreement at distance 2^0 = 1. Points that agree on F cannot be told
/// apart by patterns on F. Hence for delta in (0, 1] the answer is the number
/// of distinct patterns; for delta > 1 nothing is separated (d <= 1), so at
/// most one point survives.
inline std::size_t separated_count(const std::vector<Pattern>& pats, double delta) {
  if (!(delta > 0)) throw InvalidArgument("separated_count: delta must be > 0");
  if (pats.empty()) return 0;
  for (const auto& p : pats)
    if (!(p.window() == pats.front().window()))
      throw InvalidArgument("separated_count: patterns on different windows");
  if (delta > 1.0) return 1;
  std::set<std::vector<Symbol>> distinct;
  for (const auto& p : pats) distinct.insert(p.symbols());
  return distinct.size();
}

struct EntropyEstimate {
  double value = 0;               ///< log(N_k) / |F_k| at the last stage
  std::vector<double> per_stage;  ///< log(N_n) / |F_n| for every stage
  bool monotone_nonincreasing = true;
};

/// Entropy approximated from word counts N_n on Folner sets of size |F_n|.
inline EntropyEstimate entropy_estimate(
    const std::vector<std::pair<std::uint64_t, double>>& counts) {
  if (counts.empty()) throw InvalidArgument("entropy_estimate: no stages");
  EntropyEstimate e;
  for (auto [size, n] : counts) {
    if (size == 0) throw InvalidArgument("entropy_estimate: empty Folner set");
    if (!(n >= 1)) throw InvalidArgument("entropy_estimate: N_n = 0, empty subshift");
    e.per_stage.push_back(std::log(n) / static_cast<double>(size));
  }
  for (std::size_t i = 1; i < e.per_stage.size(); ++i)
    if (e.per_stage[i] > e.per_stage[i - 1]) e.monotone_nonincreasing = false;
  e.value = e.per_stage.back();
  return e;
}

struct AsymptoticVerdict {
  bool asymptotic = false;
  Window difference;  ///< {g : x_g != y_g} when asymptotic
};

/// Exact asymptotic-pair test: the bases must agree on a common period and
/// the difference set is then the finite set of patched disagreements.
inline AsymptoticVerdict is_asymptotic_pair(const Configuration& x,
                                            const Configuration& y) {
  if (!(x.alphabet() == y.alphabet()))
    throw InvalidArgument("is_asymptotic_pair: alphabet mismatch");
  const Position L = detail::checked_lcm(x.period(), y.period());
  for (Position r = 0; r < L; ++r)
    if (x.base_at(r) != y.base_at(r)) return {false, {}};
  std::vector<Position> diff;
  std::set<Position> keys;
  for (auto& [g, s] : x.patch()) keys.insert(g);
  for (auto& [g, s] : y.patch()) keys.insert(g);
  for (Position g : keys)
    if (x.at(g) != y.at(g)) diff.push_back(g);
  return {true, Window(std::move(diff))};
}

}  // namespace symdyn
