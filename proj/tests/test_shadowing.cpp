#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "symdyn/shadowing.hpp"

using namespace symdyn;
using namespace symdyn::shadow;

namespace {

LaurentMatrix random_matrix(std::mt19937_64& rng, int k) {
  std::map<Position, IntMatrix> c;
  for (int t = 0; t < 3; ++t) {
    IntMatrix m(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) m(i, j) = static_cast<long long>(rng() % 7) - 3;
    c[static_cast<Position>(rng() % 7) - 3] = m;
  }
  return LaurentMatrix(k, c);
}

// ||A B - I||_1 by a plain triple loop over offsets, independent of multiply().
double naive_residual(const LaurentMatrix& A, const RealLaurent& B) {
  const int k = A.k();
  std::map<Position, RealMatrix> c;
  for (auto& [s, a] : A.coeffs())
    for (auto& [u, b] : B.coeffs) {
      auto& m = c.try_emplace(s + u, RealMatrix::Zero(k, k)).first->second;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          for (int l = 0; l < k; ++l) m(i, j) += static_cast<double>(a(i, l)) * b(l, j);
    }
  c.try_emplace(0, RealMatrix::Zero(k, k)).first->second -= RealMatrix::Identity(k, k);
  double r = 0;
  for (auto& [s, m] : c) r += m.cwiseAbs().sum();
  return r;
}

struct Setup {
  LaurentMatrix A;
  Ell1Approx B;
  ShadowParams p;
};

Setup make(const LaurentMatrix& A, double eps, Position R = 80) {
  auto B = l1_inverse(A.involution(), 1e-10, R);
  auto p = delta_for_epsilon(A, B, eps);
  return {A, std::move(B), p};
}

OrbitPoint lattice(const Setup& s, std::uint64_t seed, long long amp = 1) {
  return OrbitPoint(LatticePoint{s.A.k(), seed, amp, std::make_shared<const RealLaurent>(s.B.B)});
}

RealVector scalar(double v) { return RealVector::Constant(1, v); }

}  // namespace

TEST(Laurent, ParseAndPrint) {
  const auto a = parse_polynomial("3 - 1t");
  EXPECT_EQ(a.to_string(), "3 - t");
  EXPECT_EQ(a.l1_norm(), 4);
  EXPECT_EQ(parse_polynomial("t^-2 + 2t^-2 - t").to_string(), "3t^-2 - t");
  EXPECT_EQ(parse_polynomial("1 - 1").to_string(), "0");
  EXPECT_THROW(parse_polynomial("3 x"), InvalidArgument);
  EXPECT_THROW(parse_polynomial("t^"), InvalidArgument);
  EXPECT_THROW(parse_polynomial(""), InvalidArgument);
}

TEST(Laurent, InvolutionIsIsometricAndInvolutive) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 20; ++t) {
    const auto A = random_matrix(rng, 1 + static_cast<int>(t % 3));
    EXPECT_EQ(A.involution().l1_norm(), A.l1_norm());
    EXPECT_EQ(A.involution().involution(), A);
    for (auto& [s, m] : A.coeffs()) EXPECT_EQ(A.involution().at(-s), m.transpose());
  }
}

TEST(Inverse, ThreeMinusT) {
  const auto A = parse_polynomial("3 - t");
  const auto B = l1_inverse(A.involution(), 1e-12, 60);
  EXPECT_EQ(B.method, "neumann");
  EXPECT_NEAR(B.norm, 0.5, 1e-12);
  for (Position n = 0; n <= 30; ++n)
    EXPECT_NEAR(B.B.at(-n)(0, 0), std::pow(3.0, -(n + 1.0)), 1e-15) << n;
  EXPECT_EQ(B.B.max_offset(), 0);
  EXPECT_LE(B.residual, 1e-12);
  EXPECT_LE(naive_residual(A.involution(), B.B), B.residual);
  EXPECT_LE(B.tail_bound, 1e-12);
}

TEST(Inverse, FourierPathAndNaiveResidual) {
  const auto A = parse_polynomial("2 + 2t + t^2");
  const auto B = l1_inverse(A.involution(), 1e-10, 120);
  EXPECT_EQ(B.method, "fourier");
  EXPECT_LE(B.residual, 1e-10);
  EXPECT_LE(naive_residual(A.involution(), B.B), B.residual);
  // Widening the window leaves the coefficients in place.
  const auto wide = l1_inverse(A.involution(), 1e-10, 240);
  for (Position s = -20; s <= 20; ++s) EXPECT_NEAR(B.B.at(s)(0, 0), wide.B.at(s)(0, 0), 1e-12);
  EXPECT_NEAR(B.norm_lower(), wide.norm_lower(), 1e-9);
}

TEST(Inverse, IdentityAndMatrixCase) {
  const auto I = l1_inverse(LaurentMatrix::identity(2), 1e-12, 5);
  EXPECT_EQ(naive_residual(LaurentMatrix::identity(2), I.B), 0.0);
  EXPECT_LE(I.residual, 1e-14);  // certified bound includes rounding
  EXPECT_EQ(I.B.at(0), RealMatrix::Identity(2, 2));
  EXPECT_EQ(I.B.coeffs.size(), 1u);

  IntMatrix a0(2, 2), a1(2, 2);
  a0 << 4, 0, 0, 4;
  a1 << -1, -1, 0, -1;
  const LaurentMatrix A(2, {{0, a0}, {1, a1}});
  const auto B = l1_inverse(A.involution(), 1e-10, 80);
  EXPECT_LE(B.residual, 1e-10);
  EXPECT_LE(naive_residual(A.involution(), B.B), 1e-10);
  EXPECT_LE(B.residual_left, 1e-10);
}

TEST(Inverse, SingularSymbolGivesWitness) {
  try {
    l1_inverse(parse_polynomial("1 - t").involution(), 1e-10, 40);
    FAIL() << "expected NonInvertible";
  } catch (const NonInvertible& e) {
    EXPECT_NEAR(e.witness_theta, 0.0, 1e-12);
    EXPECT_LT(e.witness_magnitude, 1e-9);
  }
  // 1 + t vanishes at theta = pi.
  try {
    l1_inverse(parse_polynomial("1 + t").involution(), 1e-10, 40);
    FAIL() << "expected NonInvertible";
  } catch (const NonInvertible& e) {
    EXPECT_NEAR(e.witness_theta, std::numbers::pi, 1e-9);
  }
}

TEST(Lift, NearAnchor) {
  EXPECT_NEAR(lift_near(scalar(0.51), scalar(0.49), 0.05)[0], 0.51, 1e-15);
  EXPECT_NEAR(lift_near(scalar(-0.49), scalar(0.49), 0.05)[0], 0.51, 1e-15);
  EXPECT_NEAR(lift_near(scalar(0.98), scalar(0.0), 0.05)[0], -0.02, 1e-15);
  EXPECT_THROW(lift_near(scalar(0.51), scalar(0.49), 0.005), NumericMargin);
  EXPECT_THROW(lift_near(scalar(0.1), scalar(0.0), 0.5), InvalidArgument);
  EXPECT_NEAR(rho(scalar(0.99), scalar(0.01)), 0.02, 1e-15);
  EXPECT_EQ(rho(scalar(0.25), scalar(0.25)), 0.0);
}

TEST(Params, DeltaForEpsilon) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  EXPECT_EQ(s.p.norm_A, 4);
  EXPECT_DOUBLE_EQ(s.p.delta, 1.0 / 16);
  EXPECT_EQ(s.p.r_S, 1);
  EXPECT_EQ(s.p.r_F, 3);
  // Certified mass of B beyond r is 3^{-(r+1)}/2, against threshold 1/128.
  EXPECT_LT(std::pow(3.0, -4) / 2, 1.0 / 128);
  EXPECT_GT(std::pow(3.0, -3) / 2, 1.0 / 128);
  EXPECT_EQ(s.p.r_K, 4);
  EXPECT_EQ(s.p.r_W, 8);
  EXPECT_DOUBLE_EQ(s.p.delta_prime, 1.0 / 256);
  EXPECT_DOUBLE_EQ(make(parse_polynomial("3 - t"), 0.01).p.delta, 0.01);
  EXPECT_DOUBLE_EQ(make(parse_polynomial("2 + 2t + t^2"), 0.5, 120).p.delta, 0.05);
  EXPECT_THROW(delta_for_epsilon(s.A, s.B, 0.0), InvalidArgument);
  EXPECT_THROW(delta_for_epsilon(s.A, s.B, 0.1, 2), InvalidArgument);
}

TEST(Points, LatticePointsLieInXA) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  for (std::uint64_t seed : {1u, 2u, 99u})
    EXPECT_LT(membership_residual(lattice(s, seed, 3), s.A, -40, 40), 1e-9);
  const auto hp = homoclinic_point(s.A, s.B);
  EXPECT_TRUE(hp.nontrivial);
  EXPECT_LT(hp.residual, 1e-9);
  EXPECT_NEAR(hp.x.at(0)[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(hp.x.at(-1)[0], 1.0 / 9, 1e-15);
  EXPECT_EQ(hp.x.at(5)[0], 0.0);
  // Off X_A: the constant 0.1 is not annihilated.
  EXPECT_GT(membership_residual(OrbitPoint(TorusConfig::scalar_periodic({0.1})), s.A, -5, 5), 0.1);
}

TEST(Points, ExpansiveSeparation) {
  // Distinct points of X_A disagree somewhere by at least delta.
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  auto sup_rho = [](const OrbitPoint& x, const OrbitPoint& y) {
    double m = 0;
    for (Position q = -60; q <= 60; ++q) m = std::max(m, rho(x.value(q), y.value(q)));
    return m;
  };
  EXPECT_GE(sup_rho(lattice(s, 1), lattice(s, 2)), s.p.delta);
  EXPECT_GE(sup_rho(OrbitPoint(homoclinic_point(s.A, s.B).x), OrbitPoint(TorusConfig::zero(1))),
            s.p.delta);
}

TEST(Trace, TrueOrbitTracesItself) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  const auto x0 = lattice(s, 5, 2);
  TraceOptions opt;
  opt.window_lo = -15;
  opt.window_hi = 15;
  const auto r = trace(PseudoOrbitSpec::true_orbit(x0), s.A, s.B, s.p, opt);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.precondition);
  EXPECT_EQ(r.precondition->worst, 0.0);
  EXPECT_LT(r.membership_residual, 1e-9);
  for (Position q = -20; q <= 20; ++q) EXPECT_LT(rho(r.x_at(q), x0.value(q)), 1e-9) << q;
  EXPECT_LE(r.max_error, r.metric_tail + 1e-9);
}

TEST(Trace, PerturbedOrbitsAreShadowed) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  const auto x0 = lattice(s, 7);
  TraceOptions opt;
  opt.window_lo = -20;
  opt.window_hi = 20;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto po = PseudoOrbitSpec::perturbed(x0, s.p.delta_prime / 2, splitmix64(seed));
    const auto r = trace(po, s.A, s.B, s.p, opt);
    EXPECT_TRUE(r.pass) << seed;
    EXPECT_LT(r.max_error, 0.1);
    EXPECT_LT(r.membership_residual, 1e-9);
    EXPECT_LT(r.snap_max, 0.5 - 1e-9);
    // The shadow sits within the noise level of the unperturbed point.
    for (Position q = -10; q <= 10; ++q) EXPECT_LT(rho(r.x_at(q), x0.value(q)), s.p.delta);
    // Same inputs, any thread count: bitwise identical output.
    auto opt4 = opt;
    opt4.threads = 4;
    const auto r4 = trace(po, s.A, s.B, s.p, opt4);
    EXPECT_EQ(r4.z, r.z);
    EXPECT_EQ(r4.error, r.error);
  }
}

TEST(Trace, LargeNoiseIsRejected) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  const auto po = PseudoOrbitSpec::perturbed(lattice(s, 7), 0.2, 1);
  TraceOptions opt;
  opt.window_lo = -5;
  opt.window_hi = 5;
  EXPECT_THROW(trace(po, s.A, s.B, s.p, opt), NumericMargin);
  const auto rep = check_pseudo_orbit(po, s.p, -3, 3);
  EXPECT_FALSE(rep.ok);
  EXPECT_GE(rep.worst, s.p.delta);
}

TEST(Trace, MatrixCase) {
  IntMatrix a0(2, 2), a1(2, 2);
  a0 << 4, 0, 0, 4;
  a1 << -1, -1, 0, -1;
  const auto s = make(LaurentMatrix(2, {{0, a0}, {1, a1}}), 0.1);
  const auto x0 = lattice(s, 3);
  EXPECT_LT(membership_residual(x0, s.A, -20, 20), 1e-9);
  TraceOptions opt;
  opt.window_lo = -6;
  opt.window_hi = 6;
  const auto r = trace(PseudoOrbitSpec::perturbed(x0, s.p.delta_prime / 2, 11), s.A, s.B, s.p, opt);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.membership_residual, 1e-9);
}

TEST(Splice, HomoclinicIntoZero) {
  const auto s = make(parse_polynomial("3 - t"), 0.1);
  const OrbitPoint outer(TorusConfig::zero(1));
  const OrbitPoint inner(homoclinic_point(s.A, s.B).x.shifted(-20));
  auto [po, chk] = splice_orbits(outer, inner, Window::interval(0, 41), s.A, s.p, -60, 60);
  EXPECT_TRUE(chk.ok);
  EXPECT_LT(chk.worst, s.p.delta_prime);
  TraceOptions opt;
  opt.window_lo = -60;
  opt.window_hi = 60;
  const auto r = trace(po, s.A, s.B, s.p, opt);
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(splice_orbits(outer, inner, Window::interval(0, 21), s.A, s.p, -30, 30),
               NumericMargin);
  EXPECT_THROW(splice_orbits(outer, OrbitPoint(TorusConfig::scalar_periodic({0.1})),
                             Window::interval(0, 41), s.A, s.p, -5, 5),
               InvalidArgument);
}
