#pragma once

// Finitely supported k x k matrix-valued functions on Z (elements of
// M_k(Z[t, t^-1])) and their real-valued counterparts. Convolution follows
// the row-vector convention (y A)_g = sum_s y_{g-s} A_s, so products compose
// as (A B)_g = sum_s A_s B_{g-s}.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "symdyn/symbolic.hpp"

namespace symdyn::shadow {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

class LaurentMatrix {
 public:
  LaurentMatrix(int k, std::map<Position, IntMatrix> coeffs) : k_(k) {
    if (k < 1) throw InvalidArgument("laurent: dimension must be >= 1");
    for (auto& [s, m] : coeffs) {
      if (m.rows() != k || m.cols() != k)
        throw InvalidArgument("laurent: coefficient at offset " + std::to_string(s) +
                              " is not " + std::to_string(k) + "x" + std::to_string(k));
      if (!m.isZero()) c_.emplace(s, m);
    }
  }
  /// k = 1 element sum_s c_s t^s.
  static LaurentMatrix scalar(const std::map<Position, long long>& c) {
    std::map<Position, IntMatrix> m;
    for (auto [s, v] : c) m.emplace(s, IntMatrix::Constant(1, 1, v));
    return LaurentMatrix(1, std::move(m));
  }
  static LaurentMatrix identity(int k) {
    return LaurentMatrix(k, {{0, IntMatrix::Identity(k, k)}});
  }

  int k() const { return k_; }
  const std::map<Position, IntMatrix>& coeffs() const { return c_; }
  bool empty() const { return c_.empty(); }
  IntMatrix at(Position s) const {
    auto it = c_.find(s);
    return it == c_.end() ? IntMatrix::Zero(k_, k_) : it->second;
  }
  Window support() const {
    std::vector<Position> p;
    for (auto& [s, m] : c_) p.push_back(s);
    return Window(std::move(p));
  }

  /// Sum of |entries| over all offsets; exact.
  long long l1_norm() const {
    long long n = 0;
    for (auto& [s, m] : c_) n += m.cwiseAbs().sum();
    return n;
  }

  /// (A*)_s = (A_{-s})^T.
  LaurentMatrix involution() const {
    std::map<Position, IntMatrix> m;
    for (auto& [s, a] : c_) m.emplace(-s, a.transpose());
    return LaurentMatrix(k_, std::move(m));
  }

  std::string to_string() const {
    if (k_ != 1) {
      std::string out;
      for (auto& [s, m] : c_) {
        out += "[" + std::to_string(s) + ":";
        for (int i = 0; i < k_; ++i)
          for (int j = 0; j < k_; ++j) out += " " + std::to_string(m(i, j));
        out += "]";
      }
      return out.empty() ? "0" : out;
    }
    std::string out;
    for (auto& [s, m] : c_) {
      const long long v = m(0, 0);
      if (out.empty()) out += v < 0 ? "-" : "";
      else out += v < 0 ? " - " : " + ";
      const long long a = std::llabs(v);
      if (s == 0 || a != 1) out += std::to_string(a);
      if (s != 0) out += s == 1 ? "t" : "t^" + std::to_string(s);
    }
    return out.empty() ? "0" : out;
  }

  friend bool operator==(const LaurentMatrix& a, const LaurentMatrix& b) {
    if (a.k_ != b.k_ || a.c_.size() != b.c_.size()) return false;
    for (auto ia = a.c_.begin(), ib = b.c_.begin(); ia != a.c_.end(); ++ia, ++ib)
      if (ia->first != ib->first || ia->second != ib->second) return false;
    return true;
  }

 private:
  int k_;
  std::map<Position, IntMatrix> c_;
};

/// Integer Laurent polynomial in t: terms like "3", "-1t", "t^-1", "2 t^3",
/// joined by + or -. Whitespace is ignored; repeated powers accumulate.
inline LaurentMatrix parse_polynomial(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw InvalidArgument("polynomial: empty input");
  auto fail = [&](const std::string& why) {
    throw InvalidArgument("polynomial \"" + std::string(text) + "\": " + why);
  };
  std::map<Position, long long> c;
  std::size_t i = 0;
  auto read_int = [&](long long& out) {
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) return false;
    if (i - start > 15) fail("coefficient too large");
    out = std::stoll(s.substr(start, i - start));
    return true;
  };
  bool first = true;
  while (i < s.size()) {
    long long sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    } else if (!first) {
      fail("expected + or - at position " + std::to_string(i));
    }
    first = false;
    long long coef = 1;
    const bool has_coef = read_int(coef);
    Position power = 0;
    if (i < s.size() && s[i] == 't') {
      ++i;
      power = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        long long esign = 1;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
          esign = s[i] == '-' ? -1 : 1;
          ++i;
        }
        long long e = 0;
        if (!read_int(e)) fail("missing exponent after ^");
        power = esign * e;
      }
    } else if (!has_coef) {
      fail("expected a coefficient or t at position " + std::to_string(i));
    }
    c[power] += sign * coef;
  }
  return LaurentMatrix::scalar(c);
}

/// Real matrix-valued function on Z with finite support.
struct RealLaurent {
  int k = 1;
  std::map<Position, RealMatrix> coeffs;

  RealMatrix at(Position s) const {
    auto it = coeffs.find(s);
    return it == coeffs.end() ? RealMatrix::Zero(k, k) : it->second;
  }
  double l1_norm() const {
    double n = 0;
    for (auto& [s, m] : coeffs) n += m.cwiseAbs().sum();
    return n;
  }
  /// l1 mass at offsets outside [lo, hi].
  double mass_outside(Position lo, Position hi) const {
    double n = 0;
    for (auto& [s, m] : coeffs)
      if (s < lo || s > hi) n += m.cwiseAbs().sum();
    return n;
  }
  Position min_offset() const { return coeffs.empty() ? 0 : coeffs.begin()->first; }
  Position max_offset() const { return coeffs.empty() ? 0 : coeffs.rbegin()->first; }
};

inline RealLaurent to_real(const LaurentMatrix& a) {
  RealLaurent r;
  r.k = a.k();
  for (auto& [s, m] : a.coeffs()) r.coeffs.emplace(s, m.cast<double>());
  return r;
}

/// (A B)_g = sum_s A_s B_{g-s}.
inline RealLaurent multiply(const RealLaurent& a, const RealLaurent& b) {
  if (a.k != b.k) throw InvalidArgument("multiply: dimension mismatch");
  RealLaurent out;
  out.k = a.k;
  for (auto& [s, ma] : a.coeffs)
    for (auto& [u, mb] : b.coeffs) {
      auto it = out.coeffs.try_emplace(s + u, RealMatrix::Zero(a.k, a.k)).first;
      it->second.noalias() += ma * mb;
    }
  return out;
}

}  // namespace symdyn::shadow
