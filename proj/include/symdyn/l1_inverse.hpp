#pragma once

// Certified truncated inverses in the Wiener algebra M_k(l1(Z)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symdyn/laurent.hpp"
#include "symdyn/parallel.hpp"

namespace symdyn::shadow {

/// Forward error factor for a sum of n floating-point products.
inline double fp_gamma(double n) {
  constexpr double u = std::numeric_limits<double>::epsilon() / 2;
  return n * u / (1 - n * u);
}

/// B on [-radius, radius] approximating the inverse of A*.
struct Ell1Approx {
  int k = 1;
  Position radius = 0;
  RealLaurent B;
  double tail_bound = 0;     ///< >= ||B_true - B||_1
  double residual = 0;       ///< >= ||A* B - I||_1, rounding included
  double residual_left = 0;  ///< >= ||B A* - I||_1, rounding included
  double norm = 0;           ///< ||B||_1 of the stored coefficients
  std::string method;        ///< "neumann" or "fourier"
  std::size_t grid = 0;      ///< circle points used by the fourier path
  std::size_t terms = 0;     ///< series terms used by the neumann path
  /// Certified enclosure of ||B_true||_1.
  double norm_lower() const { return std::max(0.0, norm - tail_bound); }
  double norm_upper() const { return norm + tail_bound; }
  /// l1 mass of the true inverse outside [-r, r], certified upper bound.
  double mass_outside(Position r) const { return B.mass_outside(-r, r) + tail_bound; }
};

struct L1Options {
  std::size_t grid_start = 1024;
  std::size_t grid_cap = std::size_t{1} << 20;
  std::size_t max_terms = 4096;
  unsigned threads = 1;
};

/// ||A B - I||_1 by direct convolution, with a rounding bound added.
inline double convolution_residual(const RealLaurent& a, const RealLaurent& b) {
  RealLaurent c = multiply(a, b);
  auto [it, fresh] = c.coeffs.try_emplace(0, RealMatrix::Zero(a.k, a.k));
  (void)fresh;
  it->second -= RealMatrix::Identity(a.k, a.k);
  const double r = c.l1_norm();
  const double terms = static_cast<double>(std::min(a.coeffs.size(), b.coeffs.size()) * a.k);
  const double entries = static_cast<double>(c.coeffs.size() * a.k * a.k);
  return (r + fp_gamma(terms + 1) * a.l1_norm() * b.l1_norm()) * (1 + fp_gamma(entries));
}

namespace detail {

inline RealLaurent truncate(const RealLaurent& b, Position lo, Position hi) {
  RealLaurent out;
  out.k = b.k;
  for (auto& [s, m] : b.coeffs)
    if (s >= lo && s <= hi) out.coeffs.emplace(s, m);
  return out;
}

inline void finish(Ell1Approx& e, const RealLaurent& A) {
  e.norm = e.B.l1_norm();
  e.residual = convolution_residual(A, e.B);
  e.residual_left = convolution_residual(e.B, A);
}

// A* = c t^m (I - M) with ||M||_1 < 1; inverse c^{-1} t^{-m} sum_j M^j.
inline std::optional<Ell1Approx> neumann(const LaurentMatrix& Astar, Position R,
                                         const L1Options& opt) {
  const int k = Astar.k();
  const double total = static_cast<double>(Astar.l1_norm());
  for (auto& [m, a] : Astar.coeffs()) {
    const IntMatrix diag = IntMatrix::Identity(k, k) * a(0, 0);
    if (a != diag) continue;
    const double c = static_cast<double>(a(0, 0));
    const double q = (total - k * std::abs(c)) / std::abs(c);
    if (!(q < 0.9)) continue;
    RealLaurent M;
    M.k = k;
    for (auto& [s, v] : Astar.coeffs())
      if (s != m) M.coeffs.emplace(s - m, -v.cast<double>() / c);
    RealLaurent sum;
    sum.k = k;
    sum.coeffs.emplace(0, RealMatrix::Identity(k, k));
    RealLaurent term = sum;
    std::size_t j = 0;
    double qpow = 1;
    const double target = std::numeric_limits<double>::epsilon() * 1e-3;
    while (j < opt.max_terms && (j == 0 || qpow * q / (1 - q) > target)) {
      term = multiply(term, M);
      ++j;
      qpow *= q;
      for (auto& [s, t] : term.coeffs) {
        auto [it, fresh] = sum.coeffs.try_emplace(s, RealMatrix::Zero(k, k));
        (void)fresh;
        it->second += t;
      }
    }
    RealLaurent full;
    full.k = k;
    for (auto& [s, v] : sum.coeffs) full.coeffs.emplace(s - m, v / c);
    Ell1Approx e;
    e.k = k;
    e.radius = R;
    e.method = "neumann";
    e.terms = j;
    e.B = truncate(full, -R, R);
    const double series_tail = qpow * q / (1 - q) / std::abs(c);
    const double rounding = fp_gamma(static_cast<double>((j + 1) * k)) * full.l1_norm() * (j + 1);
    e.tail_bound = full.mass_outside(-R, R) + series_tail + rounding;
    finish(e, to_real(Astar));
    return e;
  }
  return std::nullopt;
}

}  // namespace detail

/// Inverse of Astar on [-R, R] with certified residual <= tol.
///
/// A dominant scalar coefficient gives a geometric series with an analytic
/// tail. Otherwise the symbol is inverted on a grid of the unit circle and
/// transformed back; only the a posteriori residual r certifies that path,
/// with ||B_true - B||_1 <= ||B|| r / (1 - r).
inline Ell1Approx l1_inverse(const LaurentMatrix& Astar, double tol, Position R,
                             const L1Options& opt = {}) {
  if (!(tol > 0)) throw InvalidArgument("l1_inverse: tol must be > 0");
  if (R < 0) throw InvalidArgument("l1_inverse: radius must be >= 0");
  if (Astar.empty()) throw NonInvertible("l1_inverse: zero element", 0.0, 0.0);
  if (auto e = detail::neumann(Astar, R, opt)) {
    if (e->residual <= tol && e->residual_left <= tol) return *e;
  }

  const int k = Astar.k();
  const RealLaurent A = to_real(Astar);
  const double scale = static_cast<double>(Astar.l1_norm());
  std::size_t N = opt.grid_start;
  while (N < static_cast<std::size_t>(4 * R + 8)) N *= 2;
  double worst_sigma = std::numeric_limits<double>::infinity();
  double worst_theta = 0;
  double last_residual = std::numeric_limits<double>::infinity();
  using CMatrix = Eigen::MatrixXcd;

  for (; N <= std::max(opt.grid_cap, N); N *= 2) {
    const std::size_t nchunks = chunk_count(N, opt.threads);
    std::vector<std::vector<RealMatrix>> partial(
        nchunks, std::vector<RealMatrix>(static_cast<std::size_t>(2 * R + 1), RealMatrix::Zero(k, k)));
    std::vector<std::pair<double, double>> sig(nchunks, {std::numeric_limits<double>::infinity(), 0.0});
    parallel_chunks(N, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
      for (std::size_t j = lo; j < hi; ++j) {
        const double theta = 2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N);
        CMatrix sym = CMatrix::Zero(k, k);
        for (auto& [s, m] : A.coeffs)
          sym += m.cast<std::complex<double>>() * std::polar(1.0, static_cast<double>(s) * theta);
        double smin;
        if (k == 1) {
          smin = std::abs(sym(0, 0));
        } else {
          Eigen::JacobiSVD<CMatrix> svd(sym);
          smin = svd.singularValues().minCoeff();
        }
        if (smin < sig[c].first) sig[c] = {smin, theta};
        if (smin <= 1e-12 * scale) continue;
        const CMatrix inv = sym.inverse();
        // e^{-i s theta} for s = -R..R by recurrence from s = -R.
        const std::complex<double> step = std::polar(1.0, -theta);
        std::complex<double> w = std::polar(1.0, static_cast<double>(R) * theta);
        for (Position s = -R; s <= R; ++s) {
          partial[c][static_cast<std::size_t>(s + R)] += (inv * w).real();
          w *= step;
        }
      }
    });
    for (auto& [smin, theta] : sig)
      if (smin < worst_sigma) {
        worst_sigma = smin;
        worst_theta = theta;
      }
    if (worst_sigma <= 1e-12 * scale)
      throw NonInvertible("l1_inverse: symbol of " + Astar.to_string() +
                              " is singular on the unit circle at theta = " +
                              std::to_string(worst_theta),
                          worst_theta, worst_sigma);
    Ell1Approx e;
    e.k = k;
    e.radius = R;
    e.method = "fourier";
    e.grid = N;
    e.B.k = k;
    for (Position s = -R; s <= R; ++s) {
      RealMatrix m = RealMatrix::Zero(k, k);
      for (auto& p : partial) m += p[static_cast<std::size_t>(s + R)];
      m /= static_cast<double>(N);
      if (!m.isZero(0.0)) e.B.coeffs.emplace(s, m);
    }
    detail::finish(e, A);
    last_residual = std::max(e.residual, e.residual_left);
    if (last_residual <= tol && last_residual < 1) {
      e.tail_bound = e.norm * last_residual / (1 - last_residual);
      return e;
    }
    if (N >= opt.grid_cap) break;
  }
  throw NotCertified("l1_inverse: residual " + std::to_string(last_residual) +
                     " above tolerance " + std::to_string(tol) + " at radius " +
                     std::to_string(R) + " (min |symbol| " + std::to_string(worst_sigma) +
                     " at theta = " + std::to_string(worst_theta) + ")");
}

}  // namespace symdyn::shadow
