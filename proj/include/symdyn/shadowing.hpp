#pragma once

// Pseudo-orbit tracing for the algebraic action of Z on
//   X_A = {x in ((R/Z)^k)^Z : (x A*)_g in Z^k for every g},
// with alpha_g(x)_h = x_{h-g} and the torus metric
//   d(x, y) = sup_h 2^{-|h|} rho(x_h, y_h),  rho = sup-norm distance mod Z^k.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "symdyn/l1_inverse.hpp"
#include "symdyn/laurent.hpp"
#include "symdyn/parallel.hpp"
#include "symdyn/symbolic.hpp"

namespace symdyn::shadow {

/// Representative in [0, 1).
inline double wrap01(double v) {
  const double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}
/// Representative in [-1/2, 1/2).
inline double centered(double v) { return v - std::floor(v + 0.5); }

inline RealVector wrap01(RealVector v) {
  for (auto& c : v) c = wrap01(c);
  return v;
}
inline RealVector centered_lift(RealVector v) {
  for (auto& c : v) c = centered(c);
  return v;
}
/// rho(a + Z^k, b + Z^k) = min_m ||a - b - m||_inf.
inline double rho(const RealVector& a, const RealVector& b) {
  double m = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(centered(a[i] - b[i])));
  return m;
}

/// The unique b in [-1, 1]^k with b = b_tilde mod Z^k and ||b - anchor|| < delta,
/// for an anchor in [-1/2, 1/2)^k and delta < 1/2. Throws when
/// rho(b_tilde, anchor) >= delta.
inline RealVector lift_near(const RealVector& b_tilde, const RealVector& anchor, double delta) {
  if (!(delta > 0 && delta < 0.5)) throw InvalidArgument("lift_near: delta must lie in (0, 1/2)");
  RealVector b(b_tilde.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = anchor[i] + centered(b_tilde[i] - anchor[i]);
  const double dist = (b - anchor).cwiseAbs().maxCoeff();
  if (!(dist < delta))
    throw NumericMargin("lift_near: rho = " + std::to_string(dist) + " is not below delta = " +
                        std::to_string(delta));
  return b;
}

// ---------------------------------------------------------------------------

/// A point of ((R/Z)^k)^Z given by a periodic base plus a finite patch;
/// stored representatives lie in [0, 1)^k.
class TorusConfig {
 public:
  TorusConfig(int k, std::vector<RealVector> fundamental,
              std::map<Position, RealVector> patch = {})
      : k_(k), fund_(std::move(fundamental)), patch_(std::move(patch)) {
    if (k < 1) throw InvalidArgument("torus config: k must be >= 1");
    if (fund_.empty()) throw InvalidArgument("torus config: empty fundamental domain");
    for (auto& v : fund_) check(v), v = wrap01(v);
    for (auto& [q, v] : patch_) check(v), v = wrap01(v);
  }
  static TorusConfig zero(int k) { return TorusConfig(k, {RealVector::Zero(k)}); }
  static TorusConfig scalar_periodic(const std::vector<double>& fund) {
    std::vector<RealVector> f;
    for (double v : fund) f.push_back(RealVector::Constant(1, v));
    return TorusConfig(1, std::move(f));
  }

  int k() const { return k_; }
  Position period() const { return static_cast<Position>(fund_.size()); }
  const std::vector<RealVector>& fundamental() const { return fund_; }
  const std::map<Position, RealVector>& patch() const { return patch_; }

  RealVector at(Position q) const {
    auto it = patch_.find(q);
    if (it != patch_.end()) return it->second;
    return fund_[static_cast<std::size_t>(floor_mod(q, period()))];
  }
  /// alpha_g: result at h is this at h - g.
  TorusConfig shifted(Position g) const {
    std::vector<RealVector> f(fund_.size());
    for (Position i = 0; i < period(); ++i) f[static_cast<std::size_t>(i)] = at_base(i - g);
    std::map<Position, RealVector> p;
    for (auto& [q, v] : patch_) p.emplace(q + g, v);
    return TorusConfig(k_, std::move(f), std::move(p));
  }

 private:
  RealVector at_base(Position q) const { return fund_[static_cast<std::size_t>(floor_mod(q, period()))]; }
  void check(const RealVector& v) const {
    if (v.size() != k_) throw InvalidArgument("torus config: value of wrong dimension");
    for (double c : v)
      if (!std::isfinite(c)) throw InvalidArgument("torus config: non-finite value");
  }
  int k_;
  std::vector<RealVector> fund_;
  std::map<Position, RealVector> patch_;
};

// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
/// Stateless hash of (seed, a, b, c): the same inputs always give the same bits.
inline std::uint64_t hash4(std::uint64_t seed, Position a, Position b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  h = splitmix64(h ^ static_cast<std::uint64_t>(b));
  return splitmix64(h ^ c);
}
/// Uniform in the open interval (0, 1).
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// P(z B) for a seeded integer sequence z with entries in [-amplitude, amplitude].
struct LatticePoint {
  int k = 1;
  std::uint64_t seed = 0;
  long long amplitude = 1;
  std::shared_ptr<const RealLaurent> B;

  long long z(Position m, int coord) const {
    const auto span = static_cast<std::uint64_t>(2 * amplitude + 1);
    return static_cast<long long>(hash4(seed, m, 0, static_cast<std::uint64_t>(coord)) % span) -
           amplitude;
  }
  RealVector value(Position q) const {
    RealVector y = RealVector::Zero(k);
    Eigen::VectorXd zr(k);
    for (auto& [s, Bs] : B->coeffs) {
      for (int i = 0; i < k; ++i) zr[i] = static_cast<double>(z(q - s, i));
      y += Bs.transpose() * zr;
    }
    return wrap01(y);
  }
};

/// Precomputed values on [lo, lo + values.size()).
struct TablePoint {
  int k = 1;
  Position lo = 0;
  std::vector<RealVector> values;
  RealVector value(Position q) const {
    if (q < lo || q >= lo + static_cast<Position>(values.size()))
      throw InvalidArgument("table point: position " + std::to_string(q) + " outside the table");
    return values[static_cast<std::size_t>(q - lo)];
  }
};

class OrbitPoint {
 public:
  OrbitPoint(TorusConfig x) : v_(std::move(x)) {}
  OrbitPoint(LatticePoint x) : v_(std::move(x)) {}
  OrbitPoint(TablePoint x) : v_(std::move(x)) {}

  int k() const {
    if (auto* t = std::get_if<TorusConfig>(&v_)) return t->k();
    if (auto* l = std::get_if<LatticePoint>(&v_)) return l->k;
    return std::get<TablePoint>(v_).k;
  }
  RealVector value(Position q) const {
    if (auto* t = std::get_if<TorusConfig>(&v_)) return t->at(q);
    if (auto* l = std::get_if<LatticePoint>(&v_)) return l->value(q);
    return std::get<TablePoint>(v_).value(q);
  }
  /// Same point with values on [lo, hi] tabulated.
  OrbitPoint tabulated(Position lo, Position hi) const {
    if (std::holds_alternative<TorusConfig>(v_)) return *this;
    TablePoint t;
    t.k = k();
    t.lo = lo;
    for (Position q = lo; q <= hi; ++q) t.values.push_back(value(q));
    return OrbitPoint(std::move(t));
  }

 private:
  std::variant<TorusConfig, LatticePoint, TablePoint> v_;
};

// ---------------------------------------------------------------------------

/// A lazily evaluated family g -> x^(g).
class PseudoOrbitSpec {
 public:
  enum class Kind { TrueOrbit, Perturbed, Splice };

  static PseudoOrbitSpec true_orbit(OrbitPoint x0) {
    return PseudoOrbitSpec(Kind::TrueOrbit, std::move(x0), std::nullopt, 0, 0, {});
  }
  /// x^(g)_h = x0_{h-g} plus independent noise, uniform in (-amplitude, amplitude)
  /// per coordinate and keyed only by (seed, g, h).
  static PseudoOrbitSpec perturbed(OrbitPoint x0, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0)) throw InvalidArgument("perturbed: amplitude must be >= 0");
    return PseudoOrbitSpec(Kind::Perturbed, std::move(x0), std::nullopt, amplitude, seed, {});
  }
  /// x^(g) = alpha_g(inner) for g in F, alpha_g(outer) otherwise.
  static PseudoOrbitSpec splice(OrbitPoint outer, OrbitPoint inner, Window F) {
    if (outer.k() != inner.k()) throw InvalidArgument("splice: dimension mismatch");
    return PseudoOrbitSpec(Kind::Splice, std::move(outer), std::move(inner), 0, 0, std::move(F));
  }

  Kind kind() const { return kind_; }
  int k() const { return base_.k(); }
  double amplitude() const { return amp_; }
  std::uint64_t seed() const { return seed_; }
  const Window& F() const { return F_; }
  const OrbitPoint& base() const { return base_; }
  const std::optional<OrbitPoint>& inner() const { return inner_; }

  /// x^(g)_h.
  RealVector at(Position g, Position h) const {
    switch (kind_) {
      case Kind::TrueOrbit:
        return base_.value(h - g);
      case Kind::Perturbed: {
        RealVector v = base_.value(h - g);
        for (Eigen::Index i = 0; i < v.size(); ++i)
          v[i] += amp_ * (2 * unit_open(hash4(seed_, g, h, static_cast<std::uint64_t>(i))) - 1);
        return wrap01(v);
      }
      case Kind::Splice:
        return F_.contains(g) ? inner_->value(h - g) : base_.value(h - g);
    }
    return base_.value(h - g);
  }

  /// Same family with the underlying points tabulated on [lo, hi].
  PseudoOrbitSpec tabulated(Position lo, Position hi) const {
    PseudoOrbitSpec p = *this;
    p.base_ = base_.tabulated(lo, hi);
    if (inner_) p.inner_ = inner_->tabulated(lo, hi);
    return p;
  }

 private:
  PseudoOrbitSpec(Kind kind, OrbitPoint base, std::optional<OrbitPoint> inner, double amp,
                  std::uint64_t seed, Window F)
      : kind_(kind), base_(std::move(base)), inner_(std::move(inner)), amp_(amp), seed_(seed),
        F_(std::move(F)) {}

  Kind kind_;
  OrbitPoint base_;
  std::optional<OrbitPoint> inner_;
  double amp_;
  std::uint64_t seed_;
  Window F_;
};

// ---------------------------------------------------------------------------

/// Parameter bundle of the tracing construction, all windows symmetric
/// intervals except S.
struct ShadowParams {
  double epsilon = 0;
  long long norm_A = 0;    ///< ||A||_1 = ||A*||_1
  double delta = 0;        ///< min(1/(4 ||A||_1), 1/4, epsilon)
  Window S;                ///< supp(A*) symmetrized, with 0
  Position r_S = 0;
  Position r_F = 0;        ///< F = [-r_F, r_F]
  double F_tail = 0;       ///< certified l1 mass of B outside F
  double F_threshold = 0;  ///< (delta/2) / ||A*||_1
  Window K;                ///< F - S
  Position r_K = 0;
  Position r_W = 0;        ///< W = [-r_W, r_W]; tunable, >= r_F
  double delta_prime = 0;  ///< delta 2^{-r_K}: d < delta' forces rho < delta on K

  Window W() const { return Window::interval(-r_W, r_W + 1); }
  Window F() const { return Window::interval(-r_F, r_F + 1); }
  /// Step set W - K of the pseudo-orbit hypothesis.
  Window steps() const { return W().minkowski_sum(K.negate()); }
  /// Positions K - W at which lifts are anchored.
  Window anchored() const { return K.minkowski_sum(W().negate()); }
};

inline ShadowParams delta_for_epsilon(const LaurentMatrix& A, const Ell1Approx& B, double epsilon,
                                      std::optional<Position> r_W = std::nullopt) {
  if (!(epsilon > 0)) throw InvalidArgument("delta_for_epsilon: epsilon must be > 0");
  ShadowParams p;
  p.epsilon = epsilon;
  p.norm_A = A.l1_norm();
  p.delta = std::min({0.25 / static_cast<double>(p.norm_A), 0.25, epsilon});
  const LaurentMatrix As = A.involution();
  std::vector<Position> s{0};
  for (auto& [o, m] : As.coeffs()) s.push_back(o), s.push_back(-o);
  p.S = Window(std::move(s));
  p.r_S = std::max(-p.S.min(), p.S.max());
  p.F_threshold = p.delta / 2 / static_cast<double>(As.l1_norm());
  std::optional<Position> rf;
  for (Position r = 0; r <= B.radius; ++r)
    if (B.mass_outside(r) < p.F_threshold) {
      rf = r;
      break;
    }
  if (!rf)
    throw NotCertified("delta_for_epsilon: certified tail of B never drops below " +
                       std::to_string(p.F_threshold) + " within radius " + std::to_string(B.radius));
  p.r_F = *rf;
  p.F_tail = B.mass_outside(p.r_F);
  p.K = p.F().minkowski_sum(p.S.negate());
  p.r_K = std::max(-p.K.min(), p.K.max());
  p.r_W = r_W.value_or(2 * p.r_K);
  if (p.r_W < p.r_F) throw InvalidArgument("delta_for_epsilon: W must contain -F");
  p.delta_prime = std::ldexp(p.delta, -static_cast<int>(p.r_K));
  return p;
}

// ---------------------------------------------------------------------------

inline RealVector row_times(const RealVector& y, const RealMatrix& M) { return M.transpose() * y; }

/// max over q in [lo, hi] of the distance from (x A*)_q to Z^k.
inline double membership_residual(const OrbitPoint& x, const LaurentMatrix& A, Position lo,
                                  Position hi) {
  const RealLaurent As = to_real(A.involution());
  double worst = 0;
  for (Position q = lo; q <= hi; ++q) {
    RealVector v = RealVector::Zero(As.k);
    for (auto& [s, M] : As.coeffs) v += row_times(x.value(q - s), M);
    for (double c : v) worst = std::max(worst, std::abs(c - std::round(c)));
  }
  return worst;
}

/// Compatibility hypothesis of the lifting step, checked on g in [g_lo, g_hi]:
/// rho(x^(g)_{f-w}, x^(w+g)_f) < delta for f in K, w in W - K.
struct PreconditionReport {
  bool ok = true;
  double worst = 0;
  Position g = 0, f = 0, w = 0;  ///< worst triple
  std::uint64_t checks = 0;
};

inline PreconditionReport check_pseudo_orbit(const PseudoOrbitSpec& po, const ShadowParams& p,
                                             Position g_lo, Position g_hi, unsigned threads = 1) {
  const Window steps = p.steps();
  const std::size_t n = static_cast<std::size_t>(std::max<Position>(0, g_hi - g_lo + 1));
  const std::size_t nchunks = chunk_count(n, threads);
  std::vector<PreconditionReport> part(nchunks);
  parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    auto& r = part[c];
    for (std::size_t i = lo; i < hi; ++i) {
      const Position g = g_lo + static_cast<Position>(i);
      for (Position f : p.K)
        for (Position w : steps) {
          const double d = rho(po.at(g, f - w), po.at(w + g, f));
          ++r.checks;
          if (d > r.worst) r.worst = d, r.g = g, r.f = f, r.w = w;
        }
    }
  });
  PreconditionReport out;
  for (auto& r : part) {
    out.checks += r.checks;
    if (r.worst > out.worst) {
      out.worst = r.worst;
      out.g = r.g, out.f = r.f, out.w = r.w;
    }
  }
  out.ok = out.worst < p.delta;
  return out;
}

struct TraceOptions {
  Position window_lo = -50;
  Position window_hi = 50;
  Position horizon = 12;       ///< metric evaluated on |h| <= horizon
  double snap_margin = 1e-9;
  bool check_precondition = true;
  unsigned threads = 1;
};

struct TraceResult {
  Position window_lo = 0, window_hi = 0, horizon = 0;
  std::vector<double> error;         ///< certified bound on d(alpha_g x, x^(g)) per g
  std::vector<double> error_origin;  ///< rho(x_{-g}, x^(g)_0) per g
  double max_error = 0;
  bool pass = false;                 ///< max_error < epsilon
  double metric_tail = 0;            ///< 2^{-(horizon+1)} / 2
  double value_error = 0;            ///< bound on |x_q - computed x_q| from truncating B
  double membership_residual = 0;    ///< max dist((y A*)_q, Z^k)
  Position residual_lo = 0, residual_hi = 0;
  double snap_max = 0;               ///< max distance of a snapped value from its integer
  Position z_lo = 0;
  std::vector<std::vector<long long>> z;  ///< z_m for m = z_lo, z_lo + 1, ...
  Position x_lo = 0;
  std::vector<RealVector> x;         ///< traced point on [x_lo, x_lo + x.size())
  std::optional<PreconditionReport> precondition;

  RealVector x_at(Position q) const { return x.at(static_cast<std::size_t>(q - x_lo)); }
  const std::vector<long long>& z_at(Position m) const {
    return z.at(static_cast<std::size_t>(m - z_lo));
  }
};

/// The tracing construction: lift, round through A*, extract the diagonal
/// z_m = z^{(-m)}_0, then x = P(z B).
inline TraceResult trace(const PseudoOrbitSpec& po_in, const LaurentMatrix& A, const Ell1Approx& B,
                         const ShadowParams& p, const TraceOptions& opt = {}) {
  const int k = A.k();
  if (po_in.k() != k) throw InvalidArgument("trace: dimension mismatch");
  if (opt.window_hi < opt.window_lo) throw InvalidArgument("trace: empty window");
  const RealLaurent As = to_real(A.involution());
  const Position R = B.radius;
  TraceResult res;
  res.window_lo = opt.window_lo;
  res.window_hi = opt.window_hi;
  res.horizon = opt.horizon;
  res.metric_tail = std::ldexp(0.5, -static_cast<int>(opt.horizon + 1));

  // x is needed on [x_lo, x_hi]; z on that range widened by R.
  const Position x_lo = opt.window_lo - opt.horizon - p.r_S;
  const Position x_hi = opt.window_hi + opt.horizon + p.r_S;
  const Position z_lo = x_lo - R, z_hi = x_hi + R;
  const Position reach = p.r_W + 2 * p.r_K + opt.horizon + p.r_S + 1;
  const PseudoOrbitSpec po =
      po_in.tabulated(-z_hi - reach - R, -z_lo + reach + R);

  if (opt.check_precondition) {
    res.precondition = check_pseudo_orbit(po, p, -z_hi, -z_lo, opt.threads);
    if (!res.precondition->ok)
      throw NumericMargin("trace: pseudo-orbit hypothesis fails at g = " +
                          std::to_string(res.precondition->g) + ", f = " +
                          std::to_string(res.precondition->f) + ", w = " +
                          std::to_string(res.precondition->w) + " (rho = " +
                          std::to_string(res.precondition->worst) + ", delta = " +
                          std::to_string(p.delta) + ")");
  }

  // z_m = round(sum_s y^(g)_{-s} A*_s) with g = -m. The lift at -s != 0 is
  // anchored on the centered lift of x^(g+s)_0.
  const std::size_t nz = static_cast<std::size_t>(z_hi - z_lo + 1);
  res.z_lo = z_lo;
  res.z.assign(nz, std::vector<long long>(static_cast<std::size_t>(k), 0));
  std::vector<double> snap(chunk_count(nz, opt.threads), 0.0);
  parallel_chunks(nz, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Position m = z_lo + static_cast<Position>(i);
      const Position g = -m;
      RealVector v = RealVector::Zero(k);
      for (auto& [s, M] : As.coeffs) {
        const Position pos = -s;
        RealVector y;
        if (pos == 0) {
          y = centered_lift(po.at(g, 0));
        } else {
          const RealVector anchor = centered_lift(po.at(g - pos, 0));
          y = lift_near(po.at(g, pos), anchor, p.delta);
        }
        v += row_times(y, M);
      }
      for (int j = 0; j < k; ++j) {
        const double r = std::round(v[j]);
        const double dev = std::abs(v[j] - r);
        if (!(dev < 0.5 - opt.snap_margin))
          throw NumericMargin("trace: ambiguous integer snap at m = " + std::to_string(m) +
                              " (value " + std::to_string(v[j]) + ")");
        snap[c] = std::max(snap[c], dev);
        res.z[i][static_cast<std::size_t>(j)] = static_cast<long long>(r);
      }
    }
  });
  for (double s : snap) res.snap_max = std::max(res.snap_max, s);

  // y_q = sum_{|s| <= R} z_{q-s} B_s.
  const std::size_t nx = static_cast<std::size_t>(x_hi - x_lo + 1);
  std::vector<RealVector> y(nx, RealVector::Zero(k));
  long long zmax = 0;
  for (auto& zi : res.z)
    for (auto v : zi) zmax = std::max(zmax, std::llabs(v));
  parallel_chunks(nx, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    RealVector zr(k);
    for (std::size_t i = lo; i < hi; ++i) {
      const Position q = x_lo + static_cast<Position>(i);
      for (auto& [s, Bs] : B.B.coeffs) {
        const auto& zq = res.z[static_cast<std::size_t>(q - s - z_lo)];
        for (int j = 0; j < k; ++j) zr[j] = static_cast<double>(zq[static_cast<std::size_t>(j)]);
        y[i] += row_times(zr, Bs);
      }
    }
  });
  res.value_error = static_cast<double>(zmax) * B.tail_bound +
                    fp_gamma(static_cast<double>(B.B.coeffs.size() * k)) *
                        static_cast<double>(zmax) * B.norm;
  res.x_lo = x_lo;
  res.x.reserve(nx);
  for (auto& v : y) res.x.push_back(wrap01(v));

  // Membership residual of the computed y on the interior.
  res.residual_lo = x_lo + p.r_S;
  res.residual_hi = x_hi - p.r_S;
  for (Position q = res.residual_lo; q <= res.residual_hi; ++q) {
    RealVector v = RealVector::Zero(k);
    for (auto& [s, M] : As.coeffs) v += row_times(y[static_cast<std::size_t>(q - s - x_lo)], M);
    for (int j = 0; j < k; ++j)
      res.membership_residual = std::max(res.membership_residual, std::abs(v[j] - std::round(v[j])));
  }

  // d(alpha_g x, x^(g)): alpha_g(x)_h = x_{h-g}.
  const std::size_t ng = static_cast<std::size_t>(opt.window_hi - opt.window_lo + 1);
  res.error.assign(ng, 0.0);
  res.error_origin.assign(ng, 0.0);
  parallel_chunks(ng, opt.threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Position g = opt.window_lo + static_cast<Position>(i);
      double worst = 0;
      for (Position h = -opt.horizon; h <= opt.horizon; ++h) {
        const double r = rho(res.x_at(h - g), po.at(g, h)) + res.value_error;
        worst = std::max(worst, std::ldexp(r, -static_cast<int>(std::abs(h))));
        if (h == 0) res.error_origin[i] = r;
      }
      res.error[i] = std::max(worst, res.metric_tail);
    }
  });
  res.max_error = *std::max_element(res.error.begin(), res.error.end());
  res.pass = res.max_error < p.epsilon;
  return res;
}

// ---------------------------------------------------------------------------

/// d(x, y) truncated to |h| <= horizon, plus the bound 2^{-(horizon+1)}/2 on the rest.
inline double torus_distance(const OrbitPoint& x, const OrbitPoint& y, Position horizon) {
  double worst = std::ldexp(0.5, -static_cast<int>(horizon + 1));
  for (Position h = -horizon; h <= horizon; ++h)
    worst = std::max(worst, std::ldexp(rho(x.value(h), y.value(h)), -static_cast<int>(std::abs(h))));
  return worst;
}

struct SpliceCheck {
  bool ok = true;
  double worst = 0;       ///< max over the boundary of d(alpha_g outer, alpha_g inner)
  Position witness = 0;   ///< boundary element attaining it
  Window boundary;
  double residual_outer = 0, residual_inner = 0;
  std::optional<PreconditionReport> precondition;
};

/// The splice along F of two points of X_A, with the boundary-closeness
/// hypothesis measured on the boundary of F for the step set W - K and the
/// compatibility hypothesis re-checked on g in [g_lo, g_hi].
inline std::pair<PseudoOrbitSpec, SpliceCheck> splice_orbits(
    const OrbitPoint& outer, const OrbitPoint& inner, const Window& F, const LaurentMatrix& A,
    const ShadowParams& p, Position g_lo, Position g_hi, Position horizon = 12,
    double membership_tol = 1e-9) {
  SpliceCheck chk;
  const Position span = std::max(std::abs(g_lo), std::abs(g_hi)) + horizon + p.r_W + 2 * p.r_K;
  chk.residual_outer = membership_residual(outer, A, -span, span);
  chk.residual_inner = membership_residual(inner, A, -span, span);
  if (chk.residual_outer > membership_tol || chk.residual_inner > membership_tol)
    throw InvalidArgument("splice_orbits: input is not a point of X_A (residuals " +
                          std::to_string(chk.residual_outer) + ", " +
                          std::to_string(chk.residual_inner) + ")");
  auto po = PseudoOrbitSpec::splice(outer, inner, F);
  const Window steps = p.steps();
  chk.boundary = F.empty() ? Window{} : boundary(F, steps);
  for (Position g : chk.boundary) {
    const double d = [&] {
      double worst = std::ldexp(0.5, -static_cast<int>(horizon + 1));
      for (Position h = -horizon; h <= horizon; ++h)
        worst = std::max(worst, std::ldexp(rho(outer.value(h - g), inner.value(h - g)),
                                           -static_cast<int>(std::abs(h))));
      return worst;
    }();
    if (d > chk.worst) chk.worst = d, chk.witness = g;
  }
  chk.ok = chk.worst < p.delta_prime;
  if (!chk.ok)
    throw NumericMargin("splice_orbits: boundary closeness fails at g = " +
                        std::to_string(chk.witness) + " (d = " + std::to_string(chk.worst) +
                        ", delta' = " + std::to_string(p.delta_prime) + ")");
  chk.precondition = check_pseudo_orbit(po, p, g_lo, g_hi);
  chk.ok = chk.precondition->ok;
  return {std::move(po), chk};
}

// ---------------------------------------------------------------------------

struct HomoclinicPoint {
  TorusConfig x;
  double residual = 0;   ///< membership residual on [-R - r_S, R + r_S]
  double tail = 0;       ///< certified l1 mass of B beyond the stored radius
  bool nontrivial = false;  ///< some stored coefficient is not an integer
};

/// P(e_row B): the row of the inverse read as a point, zero beyond radius R.
inline HomoclinicPoint homoclinic_point(const LaurentMatrix& A, const Ell1Approx& B, int row = 0) {
  const int k = A.k();
  if (row < 0 || row >= k) throw InvalidArgument("homoclinic_point: row out of range");
  std::map<Position, RealVector> patch;
  bool nontrivial = false;
  for (auto& [s, Bs] : B.B.coeffs) {
    RealVector v = Bs.row(row).transpose();
    for (double c : v)
      if (std::abs(c - std::round(c)) > 1e-12) nontrivial = true;
    patch.emplace(s, v);
  }
  HomoclinicPoint hp{TorusConfig(k, {RealVector::Zero(k)}, std::move(patch)), 0, B.tail_bound,
                     nontrivial};
  const Position r = B.radius + 2;
  hp.residual = membership_residual(OrbitPoint(hp.x), A, -r, r);
  return hp;
}

}  // namespace symdyn::shadow
