#pragma once

// The group shift X = {x in (Z/2)^Gamma : sum_{h in Gamma_n} x_{gh} = 0} over
// Gamma = (+)_n (Z/2)^{a_n}, restricted to a truncation Gamma~_N. Every
// constraint is imposed only for n <= N.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "symdyn/gf2.hpp"
#include "symdyn/parallel.hpp"
#include "symdyn/tower.hpp"

namespace symdyn::groupshift {

using BigInt = boost::multiprecision::cpp_int;
using tower::DirectSumSpec;
using tower::TruncatedGroup;

/// x in (Z/2)^{Gamma~_N}, indexed by packed element.
using Values = std::vector<std::uint8_t>;

struct MembershipReport {
  bool member = true;
  /// First violated constraint: factor n and the coset representative g
  /// (component n zeroed) whose Gamma_n-coset sums to 1.
  std::optional<std::pair<std::size_t, std::uint64_t>> violation;
};

struct PatternCount {
  std::size_t N = 0;
  BigInt exponent;                      ///< prod_{k<=N} (2^{a_k} - 1) = |E_N|
  std::optional<BigInt> closed_form;    ///< 2^exponent, when printable
  std::optional<std::uint64_t> brute_kernel_dim;
  bool verified = false;  ///< brute force ran and agrees with the closed form
  std::string note;
};

enum class HomoclinicVerdict { ForcedZero, Inconclusive };

struct Deduction {
  std::uint64_t g = 0;
  std::uint64_t constraint_sum = 0;  ///< sum over g Gamma_n of the candidate
  std::uint8_t value = 0;            ///< candidate's x_g, forced to equal the sum
};

struct HomoclinicReport {
  HomoclinicVerdict verdict = HomoclinicVerdict::Inconclusive;
  std::optional<std::size_t> factor;  ///< n with g_n = identity on the support
  std::vector<Deduction> deductions;
  /// The candidate satisfies every deduction, i.e. it is the zero point.
  bool candidate_is_zero = true;
  std::size_t N = 0;
};

struct IndependenceResult {
  std::vector<std::uint64_t> F_prime;
  std::vector<std::uint64_t> prefix;      ///< gamma~_k, k <= n
  std::vector<std::uint64_t> gammas;      ///< gamma_k substituted into F, k <= M
  double c = 0;                           ///< (1/2)|Gamma~_n|^{-1} prod_{n<k<=M} (1 - 2^{-a_k})
  std::size_t F_size = 0;
  std::size_t iterations = 0;             ///< factors k > n processed
  std::size_t stabilized_at = 0;          ///< last k at which F_k strictly shrank (n if never)
  bool identity_gamma_used = false;
  bool bound_holds = false;               ///< |F'| >= c |F|
};

struct EntropyValue {
  double partial = 0;      ///< prod_{n<=N} (1 - 2^{-a_n}) log 2
  double product = 0;      ///< the bare product
  double tail_mass = 0;    ///< sum of 2^{-a_n} over the unlisted tail, when bounded
  double lower = 0;        ///< certified lower bound on the limit, when bounded
  std::size_t terms = 0;
};

class GroupShift {
 public:
  GroupShift(DirectSumSpec spec, std::size_t N,
             std::uint64_t cap = TruncatedGroup::kDefaultCap)
      : spec_(std::move(spec)), G_(spec_, N, cap) {}

  const DirectSumSpec& spec() const { return spec_; }
  const TruncatedGroup& group() const { return G_; }
  std::size_t N() const { return G_.factors(); }
  std::uint64_t size() const { return G_.size(); }

  /// I(g) = {n : g_n = gamma_n}.
  std::vector<std::size_t> I(std::uint64_t g) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= N(); ++k)
      if (G_.component(g, k) == G_.gamma(k)) out.push_back(k);
    return out;
  }

  /// E_N in increasing packed order.
  std::vector<std::uint64_t> free_set() const {
    std::vector<std::uint64_t> e;
    for (std::uint64_t g = 0; g < size(); ++g)
      if (G_.in_free_set(g)) e.push_back(g);
    return e;
  }

  /// The member x of X_N with x|_E = w, where w lists values in free_set()
  /// order. Off E, x_g sums w over all ways of replacing each component
  /// g_n = gamma_n (n in I(g)) by some h_n != gamma_n. Computed factor by
  /// factor: after sweep n, x_g = sum_{h != gamma_n} x_{g[n -> h]} whenever
  /// g_n = gamma_n, which is exactly the constraint on that coset.
  Values extend(const std::vector<std::uint8_t>& w, unsigned threads = 1) const {
    const auto E = free_set();
    if (w.size() != E.size())
      throw InvalidArgument("extend: expected " + std::to_string(E.size()) +
                            " free values, got " + std::to_string(w.size()));
    Values x(size(), 0);
    for (std::size_t i = 0; i < E.size(); ++i) x[E[i]] = w[i] & 1;
    for (std::size_t k = 1; k <= N(); ++k) {
      const std::uint64_t fibers = size() >> G_.exponent(k);
      const std::uint64_t order = G_.factor_order(k);
      const std::uint64_t gk = G_.gamma(k);
      parallel_chunks(fibers, threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t r = lo; r < hi; ++r) {
          const std::uint64_t base = fiber_base(r, k);
          std::uint8_t acc = 0;
          for (std::uint64_t h = 0; h < order; ++h)
            if (h != gk) acc ^= x[base | G_.embed(k, h)];
          x[base | G_.embed(k, gk)] = acc;
        }
      });
    }
    return x;
  }

  /// Exhaustive check of every coset constraint for n <= N.
  MembershipReport check_membership(const Values& x, unsigned threads = 1) const {
    if (x.size() != size()) throw InvalidArgument("check_membership: wrong value count");
    for (std::size_t k = 1; k <= N(); ++k) {
      const std::uint64_t fibers = size() >> G_.exponent(k);
      const std::size_t nchunks = chunk_count(fibers, threads);
      std::vector<std::optional<std::uint64_t>> bad(nchunks);
      parallel_chunks(fibers, threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
        for (std::size_t r = lo; r < hi; ++r) {
          const std::uint64_t base = fiber_base(r, k);
          std::uint8_t acc = 0;
          for (std::uint64_t h = 0; h < G_.factor_order(k); ++h) acc ^= x[base | G_.embed(k, h)];
          if (acc) {
            bad[c] = base;
            return;
          }
        }
      });
      for (auto& b : bad)
        if (b) return {false, std::make_pair(k, *b)};
    }
    return {};
  }

  /// One row per coset constraint over the |Gamma~_N| unknowns.
  std::vector<gf2::BitVector> constraint_rows() const {
    std::vector<gf2::BitVector> rows;
    for (std::size_t k = 1; k <= N(); ++k) {
      const std::uint64_t fibers = size() >> G_.exponent(k);
      for (std::uint64_t r = 0; r < fibers; ++r) {
        gf2::BitVector row(size());
        const std::uint64_t base = fiber_base(r, k);
        for (std::uint64_t h = 0; h < G_.factor_order(k); ++h) row.set(base | G_.embed(k, h));
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  static constexpr std::uint64_t kBruteVariableCap = std::uint64_t{1} << 20;
  static constexpr std::uint64_t kBruteMatrixBitCap = std::uint64_t{1} << 30;

  /// N_N = #{x|_{Gamma~_N} : x in X}: the closed form 2^{|E_N|} and, within
  /// the caps, 2^{dim ker} of the constraint system.
  PatternCount count_patterns() const {
    PatternCount pc;
    pc.N = N();
    pc.exponent = 1;
    for (std::size_t k = 1; k <= N(); ++k) pc.exponent *= BigInt(G_.factor_order(k) - 1);
    if (pc.exponent <= 1 << 16) pc.closed_form = BigInt(1) << static_cast<unsigned>(pc.exponent);
    std::uint64_t rows = 0;
    for (std::size_t k = 1; k <= N(); ++k) rows += size() >> G_.exponent(k);
    if (size() > kBruteVariableCap || rows * size() > kBruteMatrixBitCap) {
      pc.note = "brute force skipped: constraint matrix beyond the cap; closed form unverified";
      return pc;
    }
    const auto ech = gf2::eliminate(constraint_rows(), size());
    pc.brute_kernel_dim = ech.kernel_dim();
    pc.verified = BigInt(*pc.brute_kernel_dim) == pc.exponent;
    if (!pc.verified) pc.note = "brute-force kernel dimension disagrees with the closed form";
    return pc;
  }

  /// Candidate x supported on `support` (value 1 there, 0 elsewhere). Picks
  /// the least n <= N with component n = identity on the whole support; then
  /// for g in the support every gh, h in Gamma_n \ {1}, lies off the support,
  /// so membership would force x_g = sum_{h in Gamma_n} x_{gh}, which must be 0.
  HomoclinicReport homoclinic_check(const std::set<std::uint64_t>& support) const {
    HomoclinicReport rep;
    rep.N = N();
    for (auto g : support)
      if (g >= size()) throw InvalidArgument("homoclinic_check: support outside the truncation");
    if (support.empty()) {
      rep.verdict = HomoclinicVerdict::ForcedZero;
      return rep;
    }
    for (std::size_t k = 1; k <= N(); ++k) {
      if (std::all_of(support.begin(), support.end(),
                      [&](std::uint64_t g) { return G_.component(g, k) == 0; })) {
        rep.factor = k;
        break;
      }
    }
    if (!rep.factor) return rep;
    const std::size_t k = *rep.factor;
    rep.verdict = HomoclinicVerdict::ForcedZero;
    for (auto g : support) {
      Deduction d;
      d.g = g;
      d.value = 1;
      for (std::uint64_t h = 0; h < G_.factor_order(k); ++h)
        d.constraint_sum ^= support.count(g ^ G_.embed(k, h)) ? 1u : 0u;
      rep.deductions.push_back(d);
      rep.candidate_is_zero = false;
    }
    return rep;
  }

  /// Greedy independence set inside F (packed elements of this truncation)
  /// relative to the first n factors.
  IndependenceResult find_independence_set(const std::vector<std::uint64_t>& F,
                                           std::size_t n) const {
    if (n > N()) throw InvalidArgument("find_independence_set: n exceeds the truncation");
    IndependenceResult res;
    std::vector<std::uint64_t> Fs(F.begin(), F.end());
    std::sort(Fs.begin(), Fs.end());
    Fs.erase(std::unique(Fs.begin(), Fs.end()), Fs.end());
    for (auto g : Fs)
      if (g >= size()) throw InvalidArgument("find_independence_set: element outside the truncation");
    res.F_size = Fs.size();
    std::uint64_t prefix_order = 1;
    for (std::size_t k = 1; k <= n; ++k) prefix_order *= G_.factor_order(k);
    double tail = 1;
    for (std::size_t k = n + 1; k <= N(); ++k)
      tail *= 1.0 - 1.0 / static_cast<double>(G_.factor_order(k));
    res.c = 0.5 / static_cast<double>(prefix_order) * tail;
    if (Fs.empty()) {
      res.bound_holds = true;
      return res;
    }

    std::uint64_t prefix_mask = 0;
    for (std::size_t k = 1; k <= n; ++k) prefix_mask |= G_.factor_mask(k);
    std::map<std::uint64_t, std::vector<std::uint64_t>> classes;
    for (auto g : Fs) classes[g & prefix_mask].push_back(g);
    const std::vector<std::uint64_t>* best = nullptr;
    std::uint64_t best_key = 0;
    for (const auto& [key, c] : classes)
      if (!best || c.size() > best->size()) {
        best = &c;
        best_key = key;
      }
    std::vector<std::uint64_t> cur = *best;
    res.stabilized_at = n;

    for (std::size_t k = 1; k <= n; ++k) {
      const std::uint64_t t = G_.component(best_key, k);
      res.prefix.push_back(t);
      std::uint64_t choice = 0;
      bool found = false;
      for (std::uint64_t h = 1; h < G_.factor_order(k) && !found; ++h)
        if (h != t) {
          choice = h;
          found = true;
        }
      if (!found) {
        choice = 0;
        res.identity_gamma_used = true;
      }
      res.gammas.push_back(choice);
    }
    for (std::size_t k = n + 1; k <= N(); ++k) {
      ++res.iterations;
      const std::uint64_t order = G_.factor_order(k);
      std::vector<std::uint64_t> count(order, 0);
      for (auto g : cur) ++count[G_.component(g, k)];
      // Qualifying: count * |Gamma_k| <= |F_k|. Prefer non-identity, then
      // the smallest count, then the least element.
      std::optional<std::uint64_t> pick;
      auto better = [&](std::uint64_t h) {
        if (!pick) return true;
        const bool hi = h != 0, pi = *pick != 0;
        if (hi != pi) return hi;
        if (count[h] != count[*pick]) return count[h] < count[*pick];
        return h < *pick;
      };
      for (std::uint64_t h = 0; h < order; ++h)
        if (count[h] * order <= cur.size() && better(h)) pick = h;
      if (*pick == 0) res.identity_gamma_used = true;
      res.gammas.push_back(*pick);
      std::vector<std::uint64_t> next;
      for (auto g : cur)
        if (G_.component(g, k) != *pick) next.push_back(g);
      if (next.size() < cur.size()) res.stabilized_at = k;
      cur = std::move(next);
    }
    res.F_prime = std::move(cur);
    res.bound_holds = static_cast<double>(res.F_prime.size()) >=
                      res.c * static_cast<double>(res.F_size);
    return res;
  }

  /// Every 0/1 pattern on F' extends to a member of X_N under the gammas of
  /// `ind`. Exhaustive, so restricted to |F'| <= max_size.
  bool realizable(const IndependenceResult& ind, std::size_t max_size = 4,
                  unsigned threads = 1) const {
    if (ind.F_prime.size() > max_size)
      throw ResourceError("realizable: |F'| = " + std::to_string(ind.F_prime.size()) +
                          " exceeds the exhaustive limit " + std::to_string(max_size));
    GroupShift X(spec_.with_gammas(padded_gammas(ind.gammas)), N(), size());
    const auto E = X.free_set();
    std::vector<std::size_t> index;
    for (auto g : ind.F_prime) {
      auto it = std::lower_bound(E.begin(), E.end(), g);
      if (it == E.end() || *it != g) return false;
      index.push_back(static_cast<std::size_t>(it - E.begin()));
    }
    const std::size_t m = ind.F_prime.size();
    for (std::uint64_t omega = 0; omega < (std::uint64_t{1} << m); ++omega) {
      std::vector<std::uint8_t> w(E.size(), 0);
      for (std::size_t i = 0; i < m; ++i) w[index[i]] = (omega >> i) & 1;
      const Values x = X.extend(w, threads);
      if (!X.check_membership(x, threads).member) return false;
      for (std::size_t i = 0; i < m; ++i)
        if (x[ind.F_prime[i]] != ((omega >> i) & 1)) return false;
    }
    return true;
  }

 private:
  // r-th element with component k zeroed, in increasing order.
  std::uint64_t fiber_base(std::uint64_t r, std::size_t k) const {
    const int s = std::countr_zero(G_.factor_mask(k) | (std::uint64_t{1} << 63));
    const std::uint64_t low = r & ((std::uint64_t{1} << s) - 1);
    return ((r >> s) << (s + G_.exponent(k))) | low;
  }

  std::vector<std::uint64_t> padded_gammas(std::vector<std::uint64_t> g) const {
    for (std::size_t k = g.size() + 1; k <= spec_.factors(); ++k) g.push_back(spec_.gamma(k));
    return g;
  }

  DirectSumSpec spec_;
  TruncatedGroup G_;
};

/// prod_{n<=N} (1 - 2^{-a_n}) log 2 over the listed exponents.
inline EntropyValue entropy_value(const DirectSumSpec& spec, std::size_t N) {
  if (N > spec.factors()) throw InvalidArgument("entropy_value: N exceeds the factor count");
  EntropyValue v;
  v.product = 1;
  for (std::size_t k = 1; k <= N; ++k) v.product *= 1.0 - std::ldexp(1.0, -spec.exponent(k));
  v.partial = v.product * std::log(2.0);
  v.terms = N;
  v.lower = v.partial;
  return v;
}

/// The infinite product for a strictly increasing exponent rule a(n),
/// truncated once the tail mass sum_{m>n} 2^{-a_m} <= 2^{-a_n} drops below
/// tol. Since -log(1 - u) <= 2u for u <= 1/2, the limit lies in
/// [partial * exp(-2 tail), partial].
inline EntropyValue entropy_value(const std::function<int(std::size_t)>& a, double tol,
                                  std::size_t max_terms = 4096) {
  EntropyValue v;
  v.product = 1;
  int prev = 0;
  for (std::size_t n = 1; n <= max_terms; ++n) {
    const int an = a(n);
    if (an <= prev) throw InvalidArgument("entropy_value: exponent rule must be strictly increasing");
    prev = an;
    v.product *= 1.0 - std::ldexp(1.0, -an);
    v.terms = n;
    v.tail_mass = std::ldexp(1.0, -an);
    if (v.tail_mass < tol) break;
  }
  v.partial = v.product * std::log(2.0);
  v.lower = v.partial * std::exp(-2.0 * v.tail_mass);
  return v;
}

}  // namespace symdyn::groupshift
