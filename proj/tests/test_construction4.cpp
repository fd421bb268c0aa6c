#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "symdyn/group_shift.hpp"

using namespace symdyn;
using namespace symdyn::groupshift;
using tower::DirectSumSpec;

namespace {

// Membership straight from the coset sums: for every k and every g, the sum
// of x over g + Gamma_k vanishes. Cosets are formed by listing, not masks.
bool naive_member(const TruncatedGroup& G, const Values& x) {
  for (std::size_t k = 1; k <= G.factors(); ++k)
    for (std::uint64_t g = 0; g < G.size(); ++g) {
      int s = 0;
      for (std::uint64_t h = 0; h < G.factor_order(k); ++h) {
        auto e = G.unpack(g);
        e.components[k - 1] ^= h;
        s += x[G.pack(e)];
      }
      if (s % 2) return false;
    }
  return true;
}

std::vector<Values> all_members(const TruncatedGroup& G) {
  std::vector<Values> out;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << G.size()); ++code) {
    Values x(G.size());
    for (std::uint64_t g = 0; g < G.size(); ++g) x[g] = (code >> g) & 1;
    if (naive_member(G, x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

TEST(Gf2, RankMatchesBruteKernel) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    const std::size_t rows = 1 + rng() % 9, cols = 1 + rng() % 11;
    std::vector<gf2::BitVector> m;
    for (std::size_t r = 0; r < rows; ++r) {
      gf2::BitVector v(cols);
      for (std::size_t c = 0; c < cols; ++c) v.set(c, rng() & 1);
      m.push_back(v);
    }
    std::size_t kernel = 0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << cols); ++x) {
      bool ok = true;
      for (auto& row : m) {
        int s = 0;
        for (std::size_t c = 0; c < cols; ++c) s += row.get(c) && ((x >> c) & 1);
        ok = ok && s % 2 == 0;
      }
      kernel += ok;
    }
    EXPECT_EQ(std::uint64_t{1} << gf2::eliminate(m, cols).kernel_dim(), kernel);
  }
}

TEST(PatternCount, ClosedFormAgreesWithDirectEnumeration) {
  for (auto exps : std::vector<std::vector<int>>{{1}, {1, 2}, {2, 1}, {1, 1, 2}, {2, 2}, {1, 3}}) {
    const auto spec = DirectSumSpec::with_default_gamma(exps);
    const GroupShift X(spec, exps.size());
    const auto pc = X.count_patterns();
    EXPECT_TRUE(pc.verified);
    ASSERT_TRUE(pc.closed_form);
    EXPECT_EQ(BigInt(all_members(X.group()).size()), *pc.closed_form);
    std::uint64_t e = 1;
    for (int a : exps) e *= (std::uint64_t{1} << a) - 1;
    EXPECT_EQ(pc.exponent, e);
    EXPECT_EQ(X.free_set().size(), e);
  }
}

TEST(PatternCount, Examples) {
  const auto spec = DirectSumSpec::with_default_gamma({1, 2});
  EXPECT_EQ(*GroupShift(spec, 2).count_patterns().brute_kernel_dim, 3u);
  EXPECT_EQ(*GroupShift(spec, 2).count_patterns().closed_form, 8);
  const auto empty = GroupShift(spec, 0).count_patterns();
  EXPECT_EQ(*empty.closed_form, 2);
  EXPECT_TRUE(empty.verified);
  const auto big = GroupShift(DirectSumSpec::with_default_gamma({10, 10}), 2).count_patterns();
  EXPECT_FALSE(big.verified);
  EXPECT_FALSE(big.note.empty());
  EXPECT_EQ(big.exponent, BigInt(1023) * 1023);
}

TEST(Extend, UniqueLinearMemberWithPrescribedFreeValues) {
  std::mt19937_64 rng(43);
  for (auto exps : std::vector<std::vector<int>>{{1, 2}, {2, 1, 1}, {2, 2}}) {
    const GroupShift X(DirectSumSpec::with_default_gamma(exps), exps.size());
    const auto E = X.free_set();
    const auto members = all_members(X.group());
    std::set<std::vector<std::uint8_t>> restrictions;
    for (auto& x : members) {
      std::vector<std::uint8_t> r;
      for (auto g : E) r.push_back(x[g]);
      restrictions.insert(r);
    }
    EXPECT_EQ(restrictions.size(), members.size());
    for (int t = 0; t < 20; ++t) {
      std::vector<std::uint8_t> a(E.size()), b(E.size()), c(E.size());
      for (std::size_t i = 0; i < E.size(); ++i) {
        a[i] = rng() & 1;
        b[i] = rng() & 1;
        c[i] = a[i] ^ b[i];
      }
      const auto xa = X.extend(a), xb = X.extend(b, 2), xc = X.extend(c, 3);
      EXPECT_TRUE(naive_member(X.group(), xa));
      EXPECT_TRUE(X.check_membership(xa).member);
      for (std::size_t i = 0; i < E.size(); ++i) EXPECT_EQ(xa[E[i]], a[i]);
      for (std::uint64_t g = 0; g < X.size(); ++g) EXPECT_EQ(xc[g], xa[g] ^ xb[g]);
    }
    EXPECT_THROW(X.extend({1}), InvalidArgument);
  }
}

TEST(Membership, ReportsViolation) {
  const GroupShift X(DirectSumSpec::with_default_gamma({1, 2}), 2);
  Values x(8, 0);
  x[5] = 1;
  const auto m = X.check_membership(x);
  EXPECT_FALSE(m.member);
  EXPECT_FALSE(naive_member(X.group(), x));
  ASSERT_TRUE(m.violation);
  EXPECT_EQ(m.violation->first, 1u);
  EXPECT_EQ(m.violation->second, 1u);
}

TEST(Homoclinic, ForcedZeroAgreesWithExhaustiveMembership) {
  for (auto exps : std::vector<std::vector<int>>{{1, 2}, {2, 1}, {1, 1, 1}}) {
    const GroupShift X(DirectSumSpec::with_default_gamma(exps), exps.size());
    int forced = 0;
    for (std::uint64_t code = 1; code < (std::uint64_t{1} << X.size()); ++code) {
      std::set<std::uint64_t> S;
      Values x(X.size(), 0);
      for (std::uint64_t g = 0; g < X.size(); ++g)
        if ((code >> g) & 1) S.insert(g), x[g] = 1;
      const auto rep = X.homoclinic_check(S);
      if (rep.verdict != HomoclinicVerdict::ForcedZero) continue;
      ++forced;
      EXPECT_FALSE(naive_member(X.group(), x));
      EXPECT_FALSE(rep.candidate_is_zero);
      for (auto& d : rep.deductions) EXPECT_EQ(d.constraint_sum, 1u);  // coset sum must be 0
    }
    EXPECT_GT(forced, 0);
  }
  const GroupShift X(DirectSumSpec::with_default_gamma({1, 2}), 2);
  EXPECT_EQ(X.homoclinic_check({}).verdict, HomoclinicVerdict::ForcedZero);
  const auto rep = X.homoclinic_check({0});
  EXPECT_EQ(rep.factor, std::optional<std::size_t>(1));
  EXPECT_EQ(X.homoclinic_check({0, 4, 1, 2}).verdict, HomoclinicVerdict::Inconclusive);
  EXPECT_THROW(X.homoclinic_check({8}), InvalidArgument);
}

TEST(Independence, BoundAndRealizationAgainstMemberList) {
  for (auto exps : std::vector<std::vector<int>>{{1, 2}, {2, 1, 1}, {1, 2, 1}}) {
    const GroupShift X(DirectSumSpec::with_default_gamma(exps), exps.size());
    const auto members = all_members(X.group());
    std::mt19937_64 rng(47);
    for (std::size_t n = 0; n < exps.size(); ++n)
      for (int t = 0; t < 6; ++t) {
        std::vector<std::uint64_t> F;
        for (std::uint64_t g = 0; g < X.size(); ++g)
          if (t == 0 || rng() % 3) F.push_back(g);
        if (F.empty()) continue;
        const auto ind = X.find_independence_set(F, n);
        EXPECT_TRUE(ind.bound_holds);
        EXPECT_GE(static_cast<double>(ind.F_prime.size()), ind.c * static_cast<double>(F.size()));
        for (auto g : ind.F_prime) EXPECT_TRUE(std::binary_search(F.begin(), F.end(), g));
        if (ind.F_prime.size() > 4) continue;
        EXPECT_TRUE(X.realizable(ind));
        // Direct route: the members of X restrict onto every pattern on F'.
        std::set<std::vector<std::uint8_t>> seen;
        for (auto& x : members) {
          std::vector<std::uint8_t> r;
          for (auto g : ind.F_prime) r.push_back(x[g]);
          seen.insert(r);
        }
        EXPECT_EQ(seen.size(), std::size_t{1} << ind.F_prime.size());
      }
  }
}

TEST(Independence, FullTruncationExample) {
  const GroupShift X(DirectSumSpec::with_default_gamma({1, 2}), 2);
  std::vector<std::uint64_t> F(8);
  for (std::uint64_t g = 0; g < 8; ++g) F[g] = g;
  const auto ind = X.find_independence_set(F, 1);
  EXPECT_DOUBLE_EQ(ind.c, 0.1875);
  EXPECT_EQ(ind.F_size, 8u);
  EXPECT_EQ(ind.F_prime.size(), 3u);
  EXPECT_TRUE(ind.bound_holds);
  EXPECT_TRUE(X.realizable(ind));
  EXPECT_THROW(X.find_independence_set(F, 3), InvalidArgument);
}

TEST(Entropy, PartialProducts) {
  const auto v = entropy_value(DirectSumSpec::with_default_gamma({1, 2}), 2);
  EXPECT_NEAR(v.partial, 0.375 * std::log(2.0), 1e-15);
  // log N_N / |Gamma~_N| reproduces the product for the last truncation.
  const GroupShift X(DirectSumSpec::with_default_gamma({1, 2}), 2);
  EXPECT_NEAR(std::log(8.0) / static_cast<double>(X.size()), v.partial, 1e-15);
  EXPECT_NEAR(entropy_value(DirectSumSpec::with_default_gamma({1, 2}), 0).partial, std::log(2.0),
              1e-15);

  const auto lin = entropy_value([](std::size_t n) { return static_cast<int>(n); }, 1e-15);
  EXPECT_NEAR(lin.product, 0.28878809508660242, 1e-15);
  EXPECT_LE(lin.lower, lin.partial);
  EXPECT_LE(lin.lower, 0.28878809508660242 * std::log(2.0) + 1e-16);
  EXPECT_GE(lin.partial, 0.28878809508660242 * std::log(2.0) - 1e-16);

  // Rapid growth: the product is dominated by its first factor.
  const auto sq = entropy_value([](std::size_t n) { return static_cast<int>(n * n); }, 1e-15);
  double ref = 1;
  for (int n = 1; n <= 8; ++n) ref *= 1 - std::ldexp(1.0, -n * n);
  EXPECT_NEAR(sq.product, ref, 1e-16);
  EXPECT_THROW(entropy_value([](std::size_t) { return 3; }, 1e-3), InvalidArgument);
}
