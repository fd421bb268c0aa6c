#pragma once

// Subgroup towers b_n Z of the integers, and truncated direct sums of the
// elementary abelian 2-groups (Z/2)^{a_n}.

#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "symdyn/symbolic.hpp"

namespace symdyn::tower {

/// Tower Z = Gamma_0 > Gamma_1 > ... with Gamma_n = b_n Z and
/// [Gamma_{n-1} : Gamma_n] = a_n.
class TowerSpec {
 public:
  explicit TowerSpec(std::vector<std::uint64_t> a) : a_(std::move(a)) {
    b_.push_back(1);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (a_[i] < 2)
        throw InvalidArgument("tower: a_" + std::to_string(i + 1) + " = " +
                              std::to_string(a_[i]) + " < 2");
      if (b_.back() > (std::uint64_t{1} << 62) / a_[i])
        throw ResourceError("tower: b_" + std::to_string(i + 1) + " overflows");
      b_.push_back(a_[i] * b_.back());
    }
  }

  std::size_t stages() const { return a_.size(); }
  /// a_n for 1 <= n <= stages().
  std::uint64_t a(std::size_t n) const { return a_.at(n - 1); }
  /// b_n for 0 <= n <= stages(); b_0 = 1.
  std::uint64_t b(std::size_t n) const { return b_.at(n); }
  const std::vector<std::uint64_t>& a_seq() const { return a_; }
  const std::vector<std::uint64_t>& b_seq() const { return b_; }

  /// Growth hypothesis a_{n+1} >= 2 b_n + 3, for 1 <= n < stages().
  bool growth_ok(std::size_t n) const {
    return a(n + 1) >= 2 * b(n) + 3;
  }
  std::vector<bool> growth_flags() const {
    std::vector<bool> f;
    for (std::size_t n = 1; n < stages(); ++n) f.push_back(growth_ok(n));
    return f;
  }

  friend bool operator==(const TowerSpec&, const TowerSpec&) = default;

 private:
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> b_;
};

/// Stage-n transversals: T_n = {j b_{n-1} : 0 <= j < a_n} for the cosets of
/// Gamma_n in Gamma_{n-1}, and E_n = [0, b_n) for the cosets of Gamma_n in Z.
struct CosetDecomp {
  std::size_t n = 0;
  std::uint64_t block = 1;   ///< b_{n-1}
  std::uint64_t modulus = 1; ///< b_n
  Window T;
  Window E;

  /// Unique (e, m) with e in E_n and g = e + m b_n.
  std::pair<Position, Position> decompose(Position g) const {
    const auto b = static_cast<Position>(modulus);
    return {floor_mod(g, b), floor_div(g, b)};
  }
  Position recompose(Position e, Position m) const {
    return e + m * static_cast<Position>(modulus);
  }
};

inline CosetDecomp coset_reps(const TowerSpec& t, std::size_t n) {
  if (n < 1 || n > t.stages())
    throw InvalidArgument("coset_reps: stage " + std::to_string(n) + " outside [1, " +
                          std::to_string(t.stages()) + "]");
  CosetDecomp d;
  d.n = n;
  d.block = t.b(n - 1);
  d.modulus = t.b(n);
  std::vector<Position> tp;
  for (std::uint64_t j = 0; j < t.a(n); ++j) tp.push_back(static_cast<Position>(j * d.block));
  d.T = Window(std::move(tp));
  d.E = Window::interval(0, static_cast<Position>(d.modulus));
  return d;
}

/// True iff the elements of F are pairwise incongruent mod b_n.
inline bool distinct_cosets(const Window& F, const TowerSpec& t, std::size_t n) {
  const auto b = static_cast<Position>(t.b(n));
  std::vector<Position> r;
  for (Position g : F) r.push_back(floor_mod(g, b));
  std::sort(r.begin(), r.end());
  return std::adjacent_find(r.begin(), r.end()) == r.end();
}

// ---------------------------------------------------------------------------

/// Finite-stage data for Gamma = (+)_n (Z/2)^{a_n}: the factor exponents and
/// one distinguished element gamma_n per factor, stored as a bit mask.
class DirectSumSpec {
 public:
  DirectSumSpec(std::vector<int> exponents, std::vector<std::uint64_t> gamma)
      : exp_(std::move(exponents)), gamma_(std::move(gamma)) {
    if (gamma_.size() != exp_.size())
      throw InvalidArgument("direct sum: one gamma per factor required");
    for (std::size_t k = 0; k < exp_.size(); ++k) {
      if (exp_[k] < 1 || exp_[k] > 30)
        throw InvalidArgument("direct sum: factor exponent must lie in [1, 30]");
      if (gamma_[k] >> exp_[k])
        throw InvalidArgument("direct sum: gamma outside its factor");
    }
  }
  /// Default gamma_n: the first standard basis vector e1 of each factor.
  static DirectSumSpec with_default_gamma(std::vector<int> exponents) {
    std::vector<std::uint64_t> g;
    for (int a : exponents) g.push_back(std::uint64_t{1} << (a - 1));
    return DirectSumSpec(std::move(exponents), std::move(g));
  }

  std::size_t factors() const { return exp_.size(); }
  int exponent(std::size_t k) const { return exp_.at(k - 1); }
  std::uint64_t gamma(std::size_t k) const { return gamma_.at(k - 1); }
  const std::vector<int>& exponents() const { return exp_; }
  const std::vector<std::uint64_t>& gammas() const { return gamma_; }
  /// Whether every gamma_n is a non-identity element.
  bool gamma_nonidentity() const {
    for (auto g : gamma_)
      if (g == 0) return false;
    return true;
  }
  DirectSumSpec with_gammas(std::vector<std::uint64_t> g) const {
    return DirectSumSpec(exp_, std::move(g));
  }

 private:
  std::vector<int> exp_;
  std::vector<std::uint64_t> gamma_;
};

struct DirectSumElement {
  std::vector<std::uint64_t> components;  ///< one bit mask per factor
  friend bool operator==(const DirectSumElement&, const DirectSumElement&) = default;
};

/// The finite subgroup of elements supported on the first N factors, with
/// elements packed into one integer. Factor 1 owns the most significant
/// bits, so integer order is lexicographic order on (g_1, ..., g_N).
class TruncatedGroup {
 public:
  static constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 24;

  TruncatedGroup(const DirectSumSpec& spec, std::size_t N,
                 std::uint64_t cap = kDefaultCap)
      : N_(N) {
    if (N > spec.factors())
      throw InvalidArgument("truncated group: N exceeds the number of factors");
    int bits = 0;
    for (std::size_t k = 1; k <= N; ++k) bits += spec.exponent(k);
    if (bits > 62 || (std::uint64_t{1} << bits) > cap)
      throw ResourceError("truncated group: 2^" + std::to_string(bits) +
                          " elements exceed the enumeration cap");
    bits_ = bits;
    int off = bits;
    for (std::size_t k = 1; k <= N; ++k) {
      const int a = spec.exponent(k);
      off -= a;
      exp_.push_back(a);
      shift_.push_back(off);
      gamma_.push_back(spec.gamma(k));
    }
  }

  std::size_t factors() const { return N_; }
  std::uint64_t size() const { return std::uint64_t{1} << bits_; }
  int exponent(std::size_t k) const { return exp_[k - 1]; }
  std::uint64_t factor_order(std::size_t k) const { return std::uint64_t{1} << exp_[k - 1]; }
  std::uint64_t gamma(std::size_t k) const { return gamma_[k - 1]; }

  std::uint64_t component(std::uint64_t g, std::size_t k) const {
    return (g >> shift_[k - 1]) & (factor_order(k) - 1);
  }
  std::uint64_t with_component(std::uint64_t g, std::size_t k, std::uint64_t c) const {
    const std::uint64_t mask = (factor_order(k) - 1) << shift_[k - 1];
    return (g & ~mask) | (c << shift_[k - 1]);
  }
  /// Mask selecting the bits of factor k.
  std::uint64_t factor_mask(std::size_t k) const {
    return (factor_order(k) - 1) << shift_[k - 1];
  }
  /// Embedding of an element of factor k.
  std::uint64_t embed(std::size_t k, std::uint64_t c) const { return c << shift_[k - 1]; }

  static std::uint64_t op(std::uint64_t g, std::uint64_t h) { return g ^ h; }
  static std::uint64_t inverse(std::uint64_t g) { return g; }
  static constexpr std::uint64_t identity() { return 0; }

  /// g and h lie in the same coset g Gamma_k.
  bool same_coset(std::uint64_t g, std::uint64_t h, std::size_t k) const {
    return ((g ^ h) & ~factor_mask(k)) == 0;
  }

  /// g_k != gamma_k for every k <= N.
  bool in_free_set(std::uint64_t g) const {
    for (std::size_t k = 1; k <= N_; ++k)
      if (component(g, k) == gamma(k)) return false;
    return true;
  }

  DirectSumElement unpack(std::uint64_t g) const {
    DirectSumElement e;
    for (std::size_t k = 1; k <= N_; ++k) e.components.push_back(component(g, k));
    return e;
  }
  std::uint64_t pack(const DirectSumElement& e) const {
    if (e.components.size() != N_)
      throw InvalidArgument("truncated group: element has wrong number of components");
    std::uint64_t g = 0;
    for (std::size_t k = 1; k <= N_; ++k) {
      if (e.components[k - 1] >= factor_order(k))
        throw InvalidArgument("truncated group: component outside its factor");
      g |= embed(k, e.components[k - 1]);
    }
    return g;
  }

  /// Components as bit strings joined by '.', e.g. "1.01".
  std::string to_bits(std::uint64_t g) const {
    std::string s;
    for (std::size_t k = 1; k <= N_; ++k) {
      if (k > 1) s.push_back('.');
      const auto c = component(g, k);
      for (int i = exponent(k) - 1; i >= 0; --i) s.push_back(((c >> i) & 1) ? '1' : '0');
    }
    return s;
  }
  std::uint64_t from_bits(std::string_view s) const {
    std::uint64_t g = 0;
    std::size_t k = 1;
    int read = 0;
    for (char c : s) {
      if (c == '.') {
        if (k > N_ || read != exponent(k))
          throw InvalidArgument("element \"" + std::string(s) + "\": bad component width");
        ++k;
        read = 0;
        continue;
      }
      if ((c != '0' && c != '1') || k > N_ || read >= exponent(k))
        throw InvalidArgument("element \"" + std::string(s) + "\": malformed");
      g = (g << 1) | static_cast<std::uint64_t>(c - '0');
      ++read;
    }
    if (N_ == 0 ? !s.empty() : (k != N_ || read != exponent(N_)))
      throw InvalidArgument("element \"" + std::string(s) + "\": wrong number of components");
    return g;
  }

 private:
  std::size_t N_;
  int bits_ = 0;
  std::vector<int> exp_;
  std::vector<int> shift_;
  std::vector<std::uint64_t> gamma_;
};

/// All elements of the truncation, in canonical (lexicographic) order.
inline std::vector<DirectSumElement> enumerate_truncated_group(
    const DirectSumSpec& spec, std::size_t N,
    std::uint64_t cap = TruncatedGroup::kDefaultCap) {
  TruncatedGroup G(spec, N, cap);
  std::vector<DirectSumElement> out;
  out.reserve(G.size());
  for (std::uint64_t g = 0; g < G.size(); ++g) out.push_back(G.unpack(g));
  return out;
}

}  // namespace symdyn::tower
