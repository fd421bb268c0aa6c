#pragma once

// Inductive block construction over a tower b_n Z of the integers with the
// ternary alphabet: stage words A_n on E_n = [0, b_n), the candidate sets B_n,
// their block-sum classes C_{s,n}, stage selection, the layers R_n / X_n, and
// exhaustive verifiers for the finite forms of the supporting lemmas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "symdyn/parallel.hpp"
#include "symdyn/sft.hpp"
#include "symdyn/tower.hpp"

namespace symdyn::blocks {

using BigInt = boost::multiprecision::cpp_int;
using tower::CosetDecomp;
using tower::TowerSpec;

inline constexpr int kSymbols = 3;

inline BigInt pow_big(std::uint64_t base, std::uint64_t exp) {
  BigInt r = 1, b = base;
  while (exp) {
    if (exp & 1) r *= b;
    b *= b;
    exp >>= 1;
  }
  return r;
}

/// Counts gathered while building a stage.
struct StageCounts {
  BigInt B;        ///< |B_n| = (|A_{n-1}| - 1)^(a_n - 1)
  BigInt B_prime;  ///< |B'_n| = 3^{b_{n-1}} |B_n|
  /// class size -> number of nonempty classes C_{s,n} of that size
  std::map<std::uint64_t, std::uint64_t> class_sizes;
};

struct StageData {
  std::size_t n = 0;
  std::vector<Word> A;          ///< lexicographically sorted
  Word w;                       ///< selected element of A
  std::optional<Word> s_prev;   ///< block sum shared by A; absent at stage 0
  StageCounts counts;
  /// Full listing s -> C_{s,n}, kept only for small stages.
  std::optional<std::map<Word, std::vector<Word>>> classes;
};

inline StageData stage0() {
  StageData s;
  s.n = 0;
  s.A = {{0}, {1}, {2}};
  s.w = {0};
  s.counts.B = 3;
  s.counts.B_prime = 3;
  return s;
}

inline Word add_mod3(Word a, const Word& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = static_cast<Symbol>((a[i] + b[i]) % kSymbols);
  return a;
}

/// Block j of a stage-n word: positions [j b_{n-1}, (j+1) b_{n-1}).
inline Word block(const Word& w, std::size_t j, std::size_t len) {
  return Word(w.begin() + static_cast<std::ptrdiff_t>(j * len),
              w.begin() + static_cast<std::ptrdiff_t>((j + 1) * len));
}

/// Pointwise mod-3 sum of the a_n blocks of a stage-n word.
inline Word block_sum(const Word& w, const CosetDecomp& d) {
  const std::size_t len = d.block;
  Word s(len, 0);
  for (std::size_t j = 0; j < d.T.size(); ++j) s = add_mod3(std::move(s), block(w, j, len));
  return s;
}

/// B_n by direct enumeration: w_{n-1} followed by a_n - 1 blocks from
/// A_{n-1} \ {w_{n-1}}, in lexicographic order.
inline std::vector<Word> enumerate_B(const StageData& prev, const CosetDecomp& d,
                                     std::uint64_t cap = std::uint64_t{1} << 22) {
  std::vector<Word> others;
  for (const auto& u : prev.A)
    if (u != prev.w) others.push_back(u);
  const std::size_t blocks = d.T.size() - 1;
  if (pow_big(others.size(), blocks) > cap)
    throw ResourceError("enumerate_B: stage " + std::to_string(d.n) + " exceeds cap");
  std::vector<Word> out;
  if (others.empty()) return out;
  std::vector<std::size_t> digit(blocks, 0);
  while (true) {
    Word w = prev.w;
    for (std::size_t j = 0; j < blocks; ++j)
      w.insert(w.end(), others[digit[j]].begin(), others[digit[j]].end());
    out.push_back(std::move(w));
    std::size_t j = blocks;
    while (j > 0 && ++digit[j - 1] == others.size()) digit[--j] = 0;
    if (j == 0) break;
  }
  return out;
}

/// Partition of B into classes keyed by block sum.
inline std::map<Word, std::vector<Word>> partition_C(const std::vector<Word>& B,
                                                     const CosetDecomp& d) {
  std::map<Word, std::vector<Word>> classes;
  for (const auto& w : B) classes[block_sum(w, d)].push_back(w);
  for (auto& [s, c] : classes) std::sort(c.begin(), c.end());
  return classes;
}

/// Picks the largest class (ties: lexicographically least key) as A_n and its
/// lexicographically least member as w_n, unless `forced_w` names a member.
inline StageData select_stage(const std::map<Word, std::vector<Word>>& classes,
                              std::size_t n, const std::optional<Word>& forced_w = {}) {
  const std::vector<Word>* best = nullptr;
  const Word* key = nullptr;
  for (const auto& [s, c] : classes) {
    if (c.empty()) continue;
    if (!best || c.size() > best->size()) {
      best = &c;
      key = &s;
    }
  }
  if (!best) throw InvalidArgument("select_stage: all classes empty");
  StageData st;
  st.n = n;
  st.A = *best;
  std::sort(st.A.begin(), st.A.end());
  st.s_prev = *key;
  if (forced_w) {
    if (!std::binary_search(st.A.begin(), st.A.end(), *forced_w))
      throw InvalidArgument("select_stage: chosen w " + to_digits(*forced_w) +
                            " is not in A_" + std::to_string(n));
    st.w = *forced_w;
  } else {
    st.w = st.A.front();
  }
  for (const auto& [s, c] : classes)
    if (!c.empty()) ++st.counts.class_sizes[c.size()];
  return st;
}

struct ConstructionOptions {
  std::uint64_t enumeration_cap = std::uint64_t{1} << 26;  ///< candidates per stage
  std::uint64_t materialized_cap = std::uint64_t{1} << 22; ///< max |A_n| kept in memory
  std::uint64_t class_listing_limit = 4096;  ///< keep full C_{s,n} listing up to this |B_n|
  unsigned threads = 1;
  std::map<std::size_t, Word> w_choice;  ///< stage -> forced w_n
};

struct ConstructionResult {
  std::vector<StageData> stages;
  /// Stage whose candidate set B_n came out empty, if the run died.
  std::optional<std::size_t> death_stage;
  std::string diagnostic;
  /// |A_last| <= 2: any further stage has |A| <= 1 and the one after that dies.
  bool continuation_dies = false;
};

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::string& s) const noexcept {
    return std::hash<std::string>{}(s);
  }
};

// Mixed-radix walk over (a_n - 1)-tuples of indices into `others`; index 0 is
// the most significant digit, so walk order equals lexicographic word order.
class CandidateWalk {
 public:
  CandidateWalk(const std::vector<Word>& others, const Word& head, std::size_t blocks,
                std::uint64_t start)
      : others_(others), head_(head), digit_(blocks, 0) {
    const std::uint64_t m = others.size();
    for (std::size_t j = blocks; j > 0; --j) {
      digit_[j - 1] = start % m;
      start /= m;
    }
    sum_.assign(head.size(), 0);
    for (std::size_t i = 0; i < head.size(); ++i) sum_[i] = static_cast<char>(head[i]);
    for (auto dj : digit_) add(others_[dj], +1);
  }

  const std::string& key() const { return sum_; }

  Word word() const {
    Word w = head_;
    for (auto dj : digit_) w.insert(w.end(), others_[dj].begin(), others_[dj].end());
    return w;
  }

  void next() {
    std::size_t j = digit_.size();
    while (j > 0) {
      --j;
      add(others_[digit_[j]], -1);
      if (++digit_[j] < others_.size()) {
        add(others_[digit_[j]], +1);
        return;
      }
      digit_[j] = 0;
      add(others_[0], +1);
    }
  }

 private:
  void add(const Word& b, int sign) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      int v = sum_[i] + sign * b[i];
      v %= kSymbols;
      if (v < 0) v += kSymbols;
      sum_[i] = static_cast<char>(v);
    }
  }

  const std::vector<Word>& others_;
  const Word& head_;
  std::vector<std::uint64_t> digit_;
  std::string sum_;
};

inline Word key_to_word(const std::string& k) {
  Word w(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) w[i] = static_cast<Symbol>(k[i]);
  return w;
}

}  // namespace detail

/// Builds stage n from stage n-1 without materializing B_n: a first parallel
/// pass counts class sizes, a second collects the winning class. Returns
/// nullopt when B_n is empty (construction death).
inline std::optional<StageData> build_stage(const StageData& prev, const CosetDecomp& d,
                                            const ConstructionOptions& opt) {
  std::vector<Word> others;
  for (const auto& u : prev.A)
    if (u != prev.w) others.push_back(u);
  const std::size_t blocks = d.T.size() - 1;
  const BigInt total_big = pow_big(others.size(), blocks);
  if (total_big == 0) return std::nullopt;
  if (total_big > opt.enumeration_cap)
    throw ResourceError("stage " + std::to_string(d.n) + ": |B_n| = " + total_big.str() +
                        " candidates exceed the enumeration cap of " +
                        std::to_string(opt.enumeration_cap));
  const auto total = static_cast<std::uint64_t>(total_big);
  const std::size_t nchunks = chunk_count(total, opt.threads);

  using Counts = std::unordered_map<std::string, std::uint64_t, detail::KeyHash>;
  std::vector<Counts> partial(nchunks);
  parallel_chunks(total, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    if (lo == hi) return;
    detail::CandidateWalk walk(others, prev.w, blocks, lo);
    for (std::size_t i = lo; i < hi; ++i) {
      ++partial[c][walk.key()];
      if (i + 1 < hi) walk.next();
    }
  });
  Counts counts = std::move(partial[0]);
  for (std::size_t c = 1; c < nchunks; ++c)
    for (auto& [k, v] : partial[c]) counts[k] += v;

  const std::string* best = nullptr;
  std::uint64_t best_size = 0;
  for (const auto& [k, v] : counts)
    if (v > best_size || (v == best_size && best && k < *best)) {
      best = &k;
      best_size = v;
    }
  if (best_size > opt.materialized_cap)
    throw ResourceError("stage " + std::to_string(d.n) + ": |A_n| = " +
                        std::to_string(best_size) + " exceeds the materialization cap");

  const bool list_all = total <= opt.class_listing_limit;
  std::vector<std::vector<Word>> members(nchunks);
  std::vector<std::vector<std::pair<std::string, Word>>> listing(nchunks);
  parallel_chunks(total, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    if (lo == hi) return;
    detail::CandidateWalk walk(others, prev.w, blocks, lo);
    for (std::size_t i = lo; i < hi; ++i) {
      if (walk.key() == *best) members[c].push_back(walk.word());
      if (list_all) listing[c].emplace_back(walk.key(), walk.word());
      if (i + 1 < hi) walk.next();
    }
  });

  StageData st;
  st.n = d.n;
  for (auto& m : members) st.A.insert(st.A.end(), m.begin(), m.end());
  st.s_prev = detail::key_to_word(*best);
  if (auto it = opt.w_choice.find(d.n); it != opt.w_choice.end()) {
    if (!std::binary_search(st.A.begin(), st.A.end(), it->second))
      throw InvalidArgument("stage " + std::to_string(d.n) + ": chosen w " +
                            to_digits(it->second) + " is not in A_n");
    st.w = it->second;
  } else {
    st.w = st.A.front();
  }
  st.counts.B = total_big;
  st.counts.B_prime = pow_big(kSymbols, d.block) * total_big;
  for (const auto& [k, v] : counts) ++st.counts.class_sizes[v];
  if (list_all) {
    std::map<Word, std::vector<Word>> cls;
    for (auto& part : listing)
      for (auto& [k, w] : part) cls[detail::key_to_word(k)].push_back(std::move(w));
    st.classes = std::move(cls);
  }
  return st;
}

/// Stages 0..max_stage, stopping early when a candidate set is empty.
inline ConstructionResult run_construction(const TowerSpec& tower, std::size_t max_stage,
                                           const ConstructionOptions& opt = {}) {
  if (max_stage > tower.stages())
    throw InvalidArgument("run_construction: max_stage " + std::to_string(max_stage) +
                          " exceeds the tower's " + std::to_string(tower.stages()) + " stages");
  ConstructionResult res;
  res.stages.push_back(stage0());
  for (std::size_t n = 1; n <= max_stage; ++n) {
    auto d = tower::coset_reps(tower, n);
    auto st = build_stage(res.stages.back(), d, opt);
    if (!st) {
      res.death_stage = n;
      res.diagnostic = "B_" + std::to_string(n) + " is empty: |A_" + std::to_string(n - 1) +
                       "| = " + std::to_string(res.stages.back().A.size());
      break;
    }
    res.stages.push_back(std::move(*st));
  }
  res.continuation_dies = res.stages.back().A.size() <= 2;
  if (res.continuation_dies && !res.death_stage) {
    const auto n = res.stages.back().n;
    res.diagnostic = "|A_" + std::to_string(n) + "| = " +
                     std::to_string(res.stages.back().A.size()) + ": stage " +
                     std::to_string(n + 1) + " would have |A| <= 1 and stage " +
                     std::to_string(n + 2) + " would be empty";
  }
  return res;
}

// ---------------------------------------------------------------------------
// Verifiers. All of them read only the stage data, so a corrupted stages
// file is judged on its own contents.

struct CardBoundRow {
  std::size_t n = 0;  ///< bound relates |A_n| and |A_{n+1}|
  BigInt lhs;         ///< |A_{n+1}| * 3^{b_n}
  BigInt rhs;         ///< (|A_n| - 1)^{a_{n+1} - 1}
  bool pass = false;
};

inline std::vector<CardBoundRow> verify_card_bound(const TowerSpec& tower,
                                                   const std::vector<StageData>& stages) {
  std::vector<CardBoundRow> rows;
  for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
    const std::size_t n = stages[i].n;
    CardBoundRow r;
    r.n = n;
    r.lhs = BigInt(stages[i + 1].A.size()) * pow_big(kSymbols, tower.b(n));
    const std::uint64_t base = stages[i].A.empty() ? 0 : stages[i].A.size() - 1;
    r.rhs = pow_big(base, tower.a(n + 1) - 1);
    r.pass = r.lhs >= r.rhs;
    rows.push_back(std::move(r));
  }
  return rows;
}

struct DisjointReport {
  std::size_t n = 0;
  bool pass = true;
  std::uint64_t checks = 0;
  /// (u, v, g): the subword of uv at offset g lies in A_n.
  std::optional<std::tuple<Word, Word, std::uint64_t>> witness;
};

/// For all u, v in A_n and 0 < g < b_n, the length-b_n subword of uv that
/// starts at g is not in A_n.
inline DisjointReport verify_translate_disjoint(const StageData& st, unsigned threads = 1) {
  DisjointReport rep;
  rep.n = st.n;
  if (st.A.empty()) return rep;
  const std::size_t b = st.A.front().size();
  std::unordered_set<std::string> members;
  for (const auto& u : st.A) members.insert(to_digits(u));
  const std::size_t m = st.A.size();
  const std::size_t nchunks = chunk_count(m, threads);
  std::vector<std::optional<std::tuple<Word, Word, std::uint64_t>>> found(nchunks);
  parallel_chunks(m, threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    std::string buf(b, '0');
    for (std::size_t i = lo; i < hi && !found[c]; ++i)
      for (std::size_t j = 0; j < m && !found[c]; ++j) {
        const Word& u = st.A[i];
        const Word& v = st.A[j];
        for (std::size_t g = 1; g < b; ++g) {
          for (std::size_t p = 0; p < b; ++p) {
            const std::size_t q = g + p;
            buf[p] = static_cast<char>('0' + (q < b ? u[q] : v[q - b]));
          }
          if (members.count(buf)) {
            found[c] = std::make_tuple(u, v, static_cast<std::uint64_t>(g));
            break;
          }
        }
      }
  });
  rep.checks = static_cast<std::uint64_t>(m) * m * (b - 1);
  for (auto& f : found)
    if (f) {
      rep.pass = false;
      rep.witness = f;
      break;
    }
  return rep;
}

struct RigidityReport {
  std::size_t n = 0;
  bool pass = true;
  std::uint64_t pairs = 0;
  /// (u, v, residue r, offending count); the count is always 1 for a failure.
  std::optional<std::tuple<Word, Word, std::uint64_t>> witness;
};

/// For distinct u, v in A_n (n >= 1) and every residue r mod b_{n-1}, the
/// number of blocks j with u[j b_{n-1} + r] != v[j b_{n-1} + r] is not 1.
/// A shared block sum s_prev forces 0 or at least 2 disagreeing blocks.
inline RigidityReport verify_rigidity(const StageData& st, std::uint64_t block_len,
                                      unsigned threads = 1) {
  RigidityReport rep;
  rep.n = st.n;
  const std::size_t m = st.A.size();
  if (m < 2 || block_len == 0) return rep;
  const std::size_t blocks = st.A.front().size() / block_len;
  const std::size_t nchunks = chunk_count(m, threads);
  std::vector<std::optional<std::tuple<Word, Word, std::uint64_t>>> found(nchunks);
  parallel_chunks(m, threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    for (std::size_t i = lo; i < hi && !found[c]; ++i)
      for (std::size_t j = i + 1; j < m && !found[c]; ++j) {
        const Word& u = st.A[i];
        const Word& v = st.A[j];
        for (std::uint64_t r = 0; r < block_len; ++r) {
          int diff = 0;
          for (std::size_t t = 0; t < blocks; ++t)
            diff += u[t * block_len + r] != v[t * block_len + r];
          if (diff == 1) {
            found[c] = std::make_tuple(u, v, r);
            break;
          }
        }
      }
  });
  rep.pairs = static_cast<std::uint64_t>(m) * (m - 1) / 2;
  for (auto& f : found)
    if (f) {
      rep.pass = false;
      rep.witness = f;
      break;
    }
  return rep;
}

struct NestingReport {
  bool pass = true;
  std::string witness;
};

/// Every u in A_{n+1} starts with w_n and all its blocks lie in A_n; every
/// element of A_{n+1} has block sum s_n.
inline NestingReport verify_nesting(const TowerSpec& tower,
                                    const std::vector<StageData>& stages) {
  NestingReport rep;
  for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
    const auto& lo = stages[i];
    const auto& hi = stages[i + 1];
    const auto d = tower::coset_reps(tower, hi.n);
    for (const auto& u : hi.A) {
      if (u.size() != d.modulus) {
        rep.pass = false;
        rep.witness = "stage " + std::to_string(hi.n) + ": word of wrong length " + to_digits(u);
        return rep;
      }
      if (block(u, 0, d.block) != lo.w) {
        rep.pass = false;
        rep.witness = "stage " + std::to_string(hi.n) + ": " + to_digits(u) +
                      " does not start with w_" + std::to_string(lo.n);
        return rep;
      }
      for (std::size_t j = 1; j < d.T.size(); ++j) {
        const Word bj = block(u, j, d.block);
        if (bj == lo.w || !std::binary_search(lo.A.begin(), lo.A.end(), bj)) {
          rep.pass = false;
          rep.witness = "stage " + std::to_string(hi.n) + ": block " + std::to_string(j) +
                        " of " + to_digits(u) + " is not in A_" + std::to_string(lo.n) +
                        " minus w";
          return rep;
        }
      }
      if (hi.s_prev && block_sum(u, d) != *hi.s_prev) {
        rep.pass = false;
        rep.witness = "stage " + std::to_string(hi.n) + ": " + to_digits(u) +
                      " has block sum " + to_digits(block_sum(u, d)) + " != s";
        return rep;
      }
    }
  }
  return rep;
}

/// Closed-form lower bound on h(X_n):
///   (a_1 - 1)/a_1 log 2 - (1/a_1) log 3
///   - sum_{k=2}^n (2 / (3^{b_{k-2}} + 1) + 2 / a_k) log 3.
inline double entropy_lower_bound(const TowerSpec& tower, std::size_t n) {
  if (n < 1 || n > tower.stages())
    throw InvalidArgument("entropy_lower_bound: stage outside the tower");
  const double a1 = static_cast<double>(tower.a(1));
  double bound = (a1 - 1) / a1 * std::log(2.0) - std::log(3.0) / a1;
  for (std::size_t k = 2; k <= n; ++k) {
    const double p = std::pow(3.0, static_cast<double>(tower.b(k - 2)));
    bound -= (2.0 / (p + 1.0) + 2.0 / static_cast<double>(tower.a(k))) * std::log(3.0);
  }
  return bound;
}

struct EntropyRow {
  std::size_t n = 0;
  double h = 0;      ///< log |A_n| / b_n
  double bound = 0;  ///< closed form; NaN at n = 0
  bool pass = true;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  bool monotone_nonincreasing = true;
  bool pass = true;
};

inline EntropyReport verify_entropy(const TowerSpec& tower,
                                    const std::vector<StageData>& stages) {
  EntropyReport rep;
  for (const auto& st : stages) {
    EntropyRow r;
    r.n = st.n;
    r.h = std::log(static_cast<double>(st.A.size())) / static_cast<double>(tower.b(st.n));
    if (st.n >= 1) {
      r.bound = entropy_lower_bound(tower, st.n);
      r.pass = r.h >= r.bound;
    } else {
      r.bound = std::nan("");
    }
    if (!rep.rows.empty() && r.h > rep.rows.back().h) rep.monotone_nonincreasing = false;
    rep.pass = rep.pass && r.pass;
    rep.rows.push_back(r);
  }
  rep.pass = rep.pass && rep.monotone_nonincreasing;
  return rep;
}

// ---------------------------------------------------------------------------

enum class LayerVerdict { InR, InX, Outside };

struct LayerMembership {
  LayerVerdict verdict = LayerVerdict::Outside;
  std::optional<Position> translate;  ///< e with shift(x, -e) in R_n
  std::vector<Position> translates;   ///< every such e; at most one for a valid stage
};

namespace detail {

inline bool in_R(const Configuration& x, const std::unordered_set<std::string>& A,
                 Position b) {
  const Position p = x.period();
  Position lo = 0, hi = p - 1;
  if (auto h = x.patch_hull()) {
    lo = floor_div(h->first - p, b) * b;
    hi = h->second + p;
  }
  std::string buf(static_cast<std::size_t>(b), '0');
  for (Position g = lo; g <= hi; g += b) {
    for (Position i = 0; i < b; ++i)
      buf[static_cast<std::size_t>(i)] = static_cast<char>('0' + x.at(g + i));
    if (!A.count(buf)) return false;
  }
  return true;
}

}  // namespace detail

/// Exact membership in R_n = {x : x|_{g + E_n} in A_n for all g in b_n Z} and
/// in X_n, the union of its translates by E_n.
inline LayerMembership membership(const Configuration& x, const StageData& st) {
  if (st.A.empty()) return {};
  const auto b = static_cast<Position>(st.A.front().size());
  if (x.alphabet().size() != kSymbols)
    throw InvalidArgument("membership: ternary configuration required");
  if (x.period() % b != 0)
    throw UndecidableRepresentation("membership: period " + std::to_string(x.period()) +
                                    " is not a multiple of b_n = " + std::to_string(b));
  std::unordered_set<std::string> A;
  for (const auto& u : st.A) A.insert(to_digits(u));
  LayerMembership res;
  for (Position e = 0; e < b; ++e)
    if (detail::in_R(shift(x, -e), A, b)) res.translates.push_back(e);
  if (res.translates.empty()) return res;
  res.translate = res.translates.front();
  res.verdict = *res.translate == 0 ? LayerVerdict::InR : LayerVerdict::InX;
  return res;
}

}  // namespace symdyn::blocks
