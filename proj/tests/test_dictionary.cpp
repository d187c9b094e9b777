#include <aniso/dictionary.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace aniso;

namespace {

const IntMatrix kXi0 = IntMatrix::diagonal({3, 2});
const IntMatrix kXi1{{3, -1}, {0, 2}};
const IntMatrix kGamma1{{1, -1}, {0, 1}};

std::vector<UnivariateQMFSet> sheared_sets() { return {chui_lian_ternary(), daubechies2()}; }

AnisoFilterBank bank0() { return build_bank(kXi0, IntVec{3, 2}, sheared_sets()); }
AnisoFilterBank bank1() { return build_bank(kXi1, IntVec{3, 2}, sheared_sets()); }

}  // namespace

TEST(UnivariateSets, SumsAndQMF) {
  for (const auto& set : {haar(), daubechies2(), chui_lian_ternary()}) {
    ASSERT_EQ(set.filters.size(), std::size_t(set.sigma));
    EXPECT_NEAR(sum(set.filters[0]), double(set.sigma), 1e-14) << set.name;
    for (std::size_t k = 1; k < set.filters.size(); ++k) EXPECT_NEAR(sum(set.filters[k]), 0.0, 1e-14) << set.name;
    EXPECT_LT(qmf_residual(set), 1e-13) << set.name;
    EXPECT_NEAR(norm2_squared(set.filters[0]), double(set.sigma), 1e-13) << set.name;
  }
}

TEST(UnivariateSets, ChuiLianRecurrence) {
  // The ternary lowpass has a double zero at both cube roots of unity
  // other than 1, i.e. both highpass polyphase checks vanish.
  const auto cl = chui_lian_ternary();
  const auto& a = cl.filters[0];
  for (int k = 1; k <= 2; ++k) {
    double re = 0, im = 0, dre = 0, dim = 0;
    for (Int n = 0; n < 6; ++n) {
      const double ang = 2 * M_PI * double(k * n) / 3.0;
      re += a.at({n}) * std::cos(ang);
      im += a.at({n}) * std::sin(ang);
      dre += double(n) * a.at({n}) * std::cos(ang);
      dim += double(n) * a.at({n}) * std::sin(ang);
    }
    EXPECT_NEAR(std::hypot(re, im), 0.0, 1e-13);
    EXPECT_NEAR(std::hypot(dre, dim), 0.0, 1e-12);
  }
}

TEST(UnivariateSets, ByName) {
  EXPECT_EQ(family_by_name("cl3").sigma, 3);
  EXPECT_EQ(family_by_name("db2").sigma, 2);
  EXPECT_EQ(family_by_name("haar").sigma, 2);
  try {
    family_by_name("db7");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse_error);
  }
}

TEST(MomentOrder, Examples) {
  const auto db = daubechies2();
  const auto cl = chui_lian_ternary();
  EXPECT_EQ(moment_order(db.filters[1]), 2);
  EXPECT_EQ(moment_order(cl.filters[1]), 2);
  EXPECT_EQ(moment_order(cl.filters[2]), 2);
  EXPECT_EQ(moment_order(db.filters[0]), 0);
  EXPECT_EQ(moment_order(haar().filters[1]), 1);
  EXPECT_EQ(moment_order(CoefSeq::univariate({1, -3, 3, -1})), 3);
}

TEST(Bank, ShearedExampleXi0) {
  const auto b = bank0();
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b.fact.theta1, IntMatrix::identity(2));
  const std::vector<IntVec> etas{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}};
  EXPECT_EQ(b.etas, etas);
  const auto cl = chui_lian_ternary();
  const auto db = daubechies2();
  for (std::size_t k = 0; k < 6; ++k) {
    const CoefSeq expect = tensor({cl.filters[etas[k][0]], db.filters[etas[k][1]]});
    EXPECT_LT(max_abs_diff(b.filters[k], expect), 1e-15);
    EXPECT_EQ(b.index_of(etas[k]), k);
  }
  EXPECT_NEAR(sum(b.lowpass()), 6.0, 1e-13);
  // Tensor moments: the lowpass has none; mixing one highpass axis gives 2
  // (a univariate highpass with 2 vanishing moments), two highpass axes give 4.
  EXPECT_EQ(b.moments, (std::vector<int>{0, 2, 2, 4, 2, 4}));
  EXPECT_EQ(b.det_abs(), 6);
}

TEST(Bank, ShearedExampleXi1IsReindexedXi0) {
  const auto b0 = bank0();
  const auto b1 = bank1();
  ASSERT_EQ(b1.size(), 6u);
  EXPECT_EQ(b1.xi, kXi1);
  for (std::size_t k = 0; k < 6; ++k) {
    // b_k^1(α) = b_k^0(Γ1 α)
    EXPECT_EQ(max_abs_diff(b1.filters[k], reindex(b0.filters[k], kGamma1)), 0.0);
    EXPECT_EQ(max_abs_diff(b1.tensor_filter(k), b0.filters[k]), 0.0);
  }
  EXPECT_EQ(b1.moments, b0.moments);
}

TEST(Bank, QMFMatrixOfShearedBanks) {
  for (const auto& b : {bank0(), bank1()}) {
    const auto r = qmf_matrix(b);
    ASSERT_EQ(r.residual.size(), 6u);
    EXPECT_LT(r.max_residual, 1e-12);
  }
}

TEST(Bank, HaarSquared) {
  const std::vector<UnivariateQMFSet> sets{haar(), haar()};
  const auto b = build_bank(IntMatrix::diagonal({2, 2}), IntVec{2, 2}, sets);
  EXPECT_EQ(b.size(), 4u);
  EXPECT_EQ(b.det_abs(), 4);
  EXPECT_EQ(qmf_matrix(b).max_residual, 0.0);
  EXPECT_NEAR(norm2_squared(b.lowpass()), 4.0, 0.0);
}

TEST(Bank, OneDimensionalIsTheUnivariateSet) {
  const std::vector<UnivariateQMFSet> sets{chui_lian_ternary()};
  const auto b = build_bank(IntMatrix::diagonal({3}), IntVec{3}, sets);
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(max_abs_diff(b.filters[k], sets[0].filters[k]), 0.0);
}

TEST(Bank, ThreeDimensional) {
  const std::vector<UnivariateQMFSet> sets{chui_lian_ternary(), chui_lian_ternary(), daubechies2()};
  const IntMatrix xi{{3, 0, 0}, {0, 3, -1}, {0, 0, 2}};
  const auto b = build_bank(xi, IntVec{3, 3, 2}, sets);
  EXPECT_EQ(b.size(), 18u);
  EXPECT_LT(qmf_matrix(b).max_residual, 1e-12);
}

TEST(Bank, Errors) {
  const std::vector<UnivariateQMFSet> swapped{daubechies2(), chui_lian_ternary()};
  try {
    build_bank(kXi0, IntVec{3, 2}, swapped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::scale_mismatch);
  }
  const std::vector<UnivariateQMFSet> one{daubechies2()};
  try {
    build_bank(kXi0, IntVec{3, 2}, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dim_mismatch);
  }
  SmithFactorization bad{IntMatrix{{2, 0}, {0, 1}}, {3, 2}, IntMatrix::identity(2)};
  try {
    build_bank(bad, sheared_sets());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_unimodular);
  }
  try {
    bank0().index_of(IntVec{3, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_index);
  }
}

TEST(Reproduction, ShearedBanksKillLinearPolynomials) {
  for (const auto& b : {bank0(), bank1()}) {
    const auto rep = reproduction_check(b, 1, Window({-30, -30}, {30, 30}));
    EXPECT_EQ(rep.monomials.size(), 3u);
    EXPECT_TRUE(rep.passed(1e-10)) << rep.max_detail;
    EXPECT_LT(rep.max_relative_fit_residual, 1e-10);
  }
}

TEST(Reproduction, HaarSquaredOnlyDegreeZero) {
  const std::vector<UnivariateQMFSet> sets{haar(), haar()};
  const auto b = build_bank(IntMatrix::diagonal({2, 2}), IntVec{2, 2}, sets);
  const Window w({0, 0}, {15, 15});
  EXPECT_TRUE(reproduction_check(b, 0, w).passed());
  const auto rep = reproduction_check(b, 1, w);
  EXPECT_FALSE(rep.passed());
  // |det|^{-1} · |first moment of the Haar highpass| · lowpass sum = 2/4
  EXPECT_NEAR(rep.max_detail, 0.5, 1e-14);
}

TEST(Reproduction, WindowTooSmall) {
  try {
    reproduction_check(bank0(), 1, Window({0, 0}, {3, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::window_too_small);
  }
}
