#pragma once

// One-dimensional subshifts of finite type given by allowed words of a fixed
// length, and the symbolic form of the asymptotic-pair splice.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "symdyn/symbolic.hpp"

namespace symdyn {

using Word = std::vector<Symbol>;

inline std::string to_digits(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (Symbol c : w) s.push_back(static_cast<char>('0' + c));
  return s;
}

inline Word from_digits(std::string_view s, const Alphabet& alphabet) {
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9' || !alphabet.contains(c - '0'))
      throw InvalidArgument("bad digit '" + std::string(1, c) + "' in word \"" +
                            std::string(s) + "\"");
    w.push_back(static_cast<Symbol>(c - '0'));
  }
  return w;
}

/// X = {x : every length-window_size subword of x is allowed}.
class SftSpec {
 public:
  SftSpec(Alphabet alphabet, int window_size, std::vector<Word> allowed)
      : alphabet_(alphabet), window_(window_size) {
    if (window_size < 1) throw InvalidArgument("sft: window_size must be >= 1");
    for (auto& w : allowed) {
      if (static_cast<int>(w.size()) != window_size)
        throw InvalidArgument("sft: allowed word of wrong length");
      for (Symbol s : w)
        if (!alphabet.contains(s)) throw InvalidArgument("sft: symbol outside alphabet");
      allowed_.insert(to_digits(w));
    }
  }

  /// Full shift over `alphabet` with windows of length 1.
  static SftSpec full_shift(Alphabet alphabet) {
    std::vector<Word> words;
    for (int s = 0; s < alphabet.size(); ++s) words.push_back({static_cast<Symbol>(s)});
    return SftSpec(alphabet, 1, std::move(words));
  }
  /// Binary shift forbidding the word 11.
  static SftSpec golden_mean() {
    return SftSpec(Alphabet(2), 2, {{0, 0}, {0, 1}, {1, 0}});
  }

  const Alphabet& alphabet() const { return alphabet_; }
  int window_size() const { return window_; }
  std::vector<std::string> allowed_digits() const {
    return {allowed_.begin(), allowed_.end()};
  }
  bool nonempty_rules() const { return !allowed_.empty(); }

  bool allows(const Symbol* first) const {
    std::string key(static_cast<std::size_t>(window_), '0');
    for (int i = 0; i < window_; ++i) key[static_cast<std::size_t>(i)] = static_cast<char>('0' + first[i]);
    return allowed_.count(key) != 0;
  }

  /// Every window of the finite word is allowed.
  bool word_allowed(const Word& w) const {
    if (static_cast<int>(w.size()) < window_) return true;
    for (std::size_t i = 0; i + static_cast<std::size_t>(window_) <= w.size(); ++i)
      if (!allows(w.data() + i)) return false;
    return true;
  }

  /// Allowed words of length n in lexicographic order.
  std::vector<Word> words(int n) const {
    std::vector<Word> out;
    Word cur;
    extend_words(cur, n, out);
    return out;
  }

 private:
  void extend_words(Word& cur, int n, std::vector<Word>& out) const {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int s = 0; s < alphabet_.size(); ++s) {
      cur.push_back(static_cast<Symbol>(s));
      const bool ok = static_cast<int>(cur.size()) < window_ ||
                      allows(cur.data() + cur.size() - static_cast<std::size_t>(window_));
      if (ok) extend_words(cur, n, out);
      cur.pop_back();
    }
  }

  Alphabet alphabet_;
  int window_;
  std::set<std::string> allowed_;
};

struct SftMembership {
  bool member = true;
  std::optional<Position> violation;  ///< start of the first forbidden window
};

/// Exhaustive membership scan: every window that touches the patch, plus one
/// full period of pure-base windows on either side.
inline SftMembership sft_membership(const Configuration& x, const SftSpec& sft) {
  if (!(x.alphabet() == sft.alphabet()))
    throw InvalidArgument("sft_membership: alphabet mismatch");
  const Position w = sft.window_size();
  const Position p = x.period();
  Position lo = 0, hi = p - 1;
  if (auto h = x.patch_hull()) {
    lo = h->first - w + 1 - p;
    hi = h->second + p;
  }
  Word buf(static_cast<std::size_t>(w));
  for (Position g = lo; g <= hi; ++g) {
    for (Position i = 0; i < w; ++i) buf[static_cast<std::size_t>(i)] = x.at(g + i);
    if (!sft.allows(buf.data())) return {false, g};
  }
  return {true, std::nullopt};
}

struct SftPair {
  Configuration x;
  Configuration y;
  Word outer_word;   ///< word of x at [0, n)
  Word inner_word;   ///< word of y at [0, n)
  Word closing;      ///< symbols appended to outer_word to make x periodic
  Window difference;
};

struct SftPairResult {
  std::optional<SftPair> pair;
  std::string diagnostic;
  std::size_t words_at_n = 0;
};

namespace detail {

// Shortest (then lexicographically least) word c such that the cyclic word
// u·c has every window allowed. BFS over the last (w-1) symbols.
inline std::optional<Word> closing_word(const SftSpec& sft, const Word& u,
                                        std::size_t max_len) {
  const std::size_t m = static_cast<std::size_t>(sft.window_size() - 1);
  const Word head(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(m));
  auto closes = [&](const Word& state) {
    Word seam = state;
    seam.insert(seam.end(), head.begin(), head.end());
    return sft.word_allowed(seam);
  };
  const Word start(u.end() - static_cast<std::ptrdiff_t>(m), u.end());
  if (closes(start)) return Word{};
  std::map<Word, Word> path{{start, {}}};
  std::deque<Word> queue{start};
  while (!queue.empty()) {
    Word state = queue.front();
    queue.pop_front();
    const Word via = path[state];
    if (via.size() >= max_len) continue;
    for (int s = 0; s < sft.alphabet().size(); ++s) {
      Word win = state;
      win.push_back(static_cast<Symbol>(s));
      if (!sft.allows(win.data())) continue;
      Word next(win.begin() + 1, win.end());
      if (path.count(next)) continue;
      Word nvia = via;
      nvia.push_back(static_cast<Symbol>(s));
      if (closes(next)) return nvia;
      path.emplace(next, nvia);
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Finds distinct allowed words u < v of length n that agree on a margin of
/// window_size - 1 symbols at each end, closes u into a periodic point x, and
/// patches v over one occurrence of u to get y. Every window of y meeting the
/// seam reads only margin symbols shared with u, so y is again a point of the
/// SFT and (x, y) is an off-diagonal asymptotic pair. Pairs are tried in
/// lexicographic order; the first that closes is returned.
inline SftPairResult find_asymptotic_pair_sft(const SftSpec& sft, int n) {
  SftPairResult res;
  const int w = sft.window_size();
  const std::size_t margin = static_cast<std::size_t>(w - 1);
  if (n < 2 * (w - 1) + 1) {
    res.diagnostic = "n = " + std::to_string(n) +
                     " leaves no free interior between the two margins of width " +
                     std::to_string(w - 1);
    return res;
  }
  const auto words = sft.words(n);
  res.words_at_n = words.size();
  if (words.size() < 2) {
    res.diagnostic = "fewer than two allowed words of length " + std::to_string(n) +
                     " (zero entropy at this horizon)";
    return res;
  }
  const std::size_t states = [&] {
    std::size_t s = 1;
    for (std::size_t i = 0; i < margin && s < (1u << 20); ++i)
      s *= static_cast<std::size_t>(sft.alphabet().size());
    return s;
  }();
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::optional<Word> closing;
    bool closing_tried = false;
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const Word& u = words[i];
      const Word& v = words[j];
      if (!std::equal(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(margin), v.begin()) ||
          !std::equal(u.end() - static_cast<std::ptrdiff_t>(margin), u.end(),
                      v.end() - static_cast<std::ptrdiff_t>(margin)))
        continue;
      if (!closing_tried) {
        closing = detail::closing_word(sft, u, states + margin);
        closing_tried = true;
      }
      if (!closing) break;
      Word fund = u;
      fund.insert(fund.end(), closing->begin(), closing->end());
      Configuration x(sft.alphabet(), fund);
      std::map<Position, Symbol> patch;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] != u[k]) patch.emplace(static_cast<Position>(k), v[k]);
      Configuration y = x.with_patch(patch);
      auto verdict = is_asymptotic_pair(x, y);
      res.pair = SftPair{x, y, u, v, *closing, verdict.difference};
      return res;
    }
  }
  res.diagnostic = "no two distinct allowed words of length " + std::to_string(n) +
                   " agree on the boundary margins and close into a periodic point";
  return res;
}

}  // namespace symdyn
