#include <aniso/subdivision.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace aniso;

namespace {

const IntMatrix kXi0 = IntMatrix::diagonal({3, 2});
const IntMatrix kXi1{{3, -1}, {0, 2}};

std::vector<UnivariateQMFSet> sheared_sets() { return {chui_lian_ternary(), daubechies2()}; }

std::vector<AnisoFilterBank> sheared_banks() {
  return {build_bank(kXi0, IntVec{3, 2}, sheared_sets()), build_bank(kXi1, IntVec{3, 2}, sheared_sets())};
}

AnisoFilterBank haar2() {
  const std::vector<UnivariateQMFSet> sets{haar(), haar()};
  return build_bank(IntMatrix::diagonal({2, 2}), IntVec{2, 2}, sets);
}

const SubdivisionOp kHaar1(IntMatrix::diagonal({2}), CoefSeq::univariate({1, 1}));

}  // namespace

TEST(Subdivide, Examples) {
  const auto banks = sheared_banks();
  const SubdivisionOp op(kXi0, banks[0].lowpass());
  EXPECT_EQ(max_abs_diff(subdivide(op, delta(2)), banks[0].lowpass()), 0.0);
  EXPECT_EQ(subdivide(kHaar1, delta(1)), CoefSeq::univariate({1, 1}));
  const CoefSeq two = iterate(kXi0, banks[0].lowpass(), delta(2), 2);
  EXPECT_EQ(two.shape(), (IntVec{3 * 5 + 6, 2 * 3 + 4}));  // Ξ(mask box) + mask box
}

TEST(Subdivide, MatchesSparseOracleOverIterations) {
  const auto banks = sheared_banks();
  for (const auto& b : banks) {
    oracle::SparseSeq ref{{IntVec{0, 0}, 1.0}};
    const auto mask = oracle::to_sparse(b.lowpass());
    for (int r = 1; r <= 3; ++r) {
      ref = oracle::subdivide(ref, mask, b.xi);
      EXPECT_LT(oracle::max_abs_diff(ref, iterate(b.xi, b.lowpass(), delta(2), r)), 1e-12) << "r=" << r;
    }
  }
}

TEST(Subdivide, RejectsNonExpansive) {
  EXPECT_THROW(SubdivisionOp(IntMatrix{{1, 1}, {0, 1}}, delta(2)), Error);
  EXPECT_THROW(SubdivisionOp(kXi0, delta(1)), Error);
}

TEST(Cascade, Examples) {
  EXPECT_EQ(max_abs_diff(cascade(kHaar1, 0).values, delta(1)), 0.0);
  const auto f = cascade(kHaar1, 5);
  EXPECT_EQ(f.values.box(), Window({0}, {31}));
  for (double v : f.values.data()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(f.xi_total, IntMatrix::diagonal({32}));
  EXPECT_NEAR(f.argument(std::vector<Int>{16})[0], 0.5, 0.0);
}

TEST(Cascade, MassIsPreserved) {
  // Σ S^r δ / |det Ξ|^r is the Riemann sum of φ, which integrates to one.
  for (const auto& b : sheared_banks()) {
    const auto f = cascade(SubdivisionOp(b.xi, b.lowpass()), 5);
    EXPECT_NEAR(sum(f.values) / std::pow(6.0, 5), 1.0, 1e-12);
  }
}

TEST(Cascade, GridCap) {
  const auto b = sheared_banks()[0];
  try {
    cascade(SubdivisionOp(b.xi, b.lowpass()), 6, GridOptions{1000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::grid_too_large);
  }
}

TEST(Wavelet, ScalingBranchIsCascade) {
  const auto b = sheared_banks()[1];
  const auto psi0 = wavelet_samples(b, 0, 4);
  const auto phi = cascade(SubdivisionOp(b.xi, b.lowpass()), 4);
  EXPECT_EQ(max_abs_diff(psi0.values, phi.values), 0.0);
  EXPECT_THROW(wavelet_samples(b, 6, 3), Error);
}

TEST(Wavelet, HaarSquaredCheckerboard) {
  const auto b = haar2();
  const auto psi = wavelet_samples(b, b.index_of(IntVec{1, 1}), 4);
  EXPECT_EQ(psi.values.box(), Window({0, 0}, {15, 15}));
  for_each_index(psi.values.box(), [&](const IntVec& a, std::size_t k) {
    const double sign = (a[0] < 8 ? 1.0 : -1.0) * (a[1] < 8 ? 1.0 : -1.0);
    EXPECT_EQ(psi.values.data()[k], sign);
  });
}

TEST(Wavelet, HighpassSamplesHaveZeroMean) {
  const auto b = sheared_banks()[0];
  for (std::size_t k = 1; k < b.size(); ++k) EXPECT_NEAR(sum(wavelet_samples(b, k, 4).values), 0.0, 1e-10);
}

TEST(Convergence, HaarIsExact) {
  const auto rep = convergence_diagnostic(kHaar1, 7);
  ASSERT_EQ(rep.d.size(), 6u);
  for (double d : rep.d) EXPECT_EQ(d, 0.0);
  const auto rep2 = convergence_diagnostic(SubdivisionOp(haar2().xi, haar2().lowpass()), 5);
  for (double d : rep2.d) EXPECT_EQ(d, 0.0);
}

TEST(Convergence, ShearedLowpassDecreases) {
  for (const auto& b : sheared_banks()) {
    const auto rep = convergence_diagnostic(SubdivisionOp(b.xi, b.lowpass()), 8);
    ASSERT_EQ(rep.d.size(), 7u);
    EXPECT_TRUE(rep.strictly_decreasing_from(2));  // r = 2..7
    EXPECT_GT(rep.decay_rate, 0.0);
    EXPECT_LT(rep.decay_rate, 1.0);
  }
}

TEST(Convergence, UnnormalizedMaskDiverges) {
  const SubdivisionOp op(IntMatrix::diagonal({2}), CoefSeq::univariate({1, 2, 1}));
  const auto rep = convergence_diagnostic(op, 7);
  EXPECT_FALSE(rep.strictly_decreasing_from(2));
  EXPECT_GT(rep.d.back(), rep.d.front());
  EXPECT_GT(rep.decay_rate, 1.0);
}

TEST(Convergence, MatchesDefinition) {
  // d_r = max |S^r δ − S^{r+1} δ(Ξ·)| computed straight from two cascades
  const auto b = sheared_banks()[1];
  const SubdivisionOp op(b.xi, b.lowpass());
  const auto rep = convergence_diagnostic(op, 5);
  for (int r = 1; r < 5; ++r) {
    const CoefSeq fine = cascade(op, r + 1).values;
    const CoefSeq coarse = cascade(op, r).values;
    EXPECT_NEAR(rep.d[r - 1], max_abs_diff(coarse, downsample(fine, b.xi)), 1e-12);
  }
}

TEST(Conjugation, DiagonalIsExact) {
  const auto b = sheared_banks()[0];
  for (int r = 1; r <= 3; ++r) EXPECT_EQ(conjugation_check(b, r), 0.0);
}

TEST(Conjugation, ShearedBank) {
  const auto b = sheared_banks()[1];
  EXPECT_LE(conjugation_check(b, 1), 1e-15);
  for (int r = 2; r <= 3; ++r) EXPECT_LE(conjugation_check(b, r), 1e-12);
}

TEST(MultipleLimit, Bookkeeping) {
  const auto banks = sheared_banks();
  const auto plain = multiple_limit(banks, std::vector<int>{}, 4);
  EXPECT_EQ(max_abs_diff(plain.values, cascade(SubdivisionOp(kXi0, banks[0].lowpass()), 4).values), 0.0);
  const auto f = multiple_limit(banks, std::vector<int>{1, 1}, 4);
  EXPECT_EQ(f.level, 6);
  EXPECT_EQ(f.xi_total, power(kXi0, 4) * kXi1 * kXi1);
  try {
    multiple_limit(banks, std::vector<int>{2}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_digit);
  }
}

TEST(MultipleLimit, JointRefinement) {
  const auto banks = sheared_banks();
  for (int j = 0; j < 2; ++j) {
    EXPECT_LE(joint_refinement_residual(banks, j, std::vector<int>{}, 4), 1e-10);
    for (int m = 0; m < 2; ++m) EXPECT_LE(joint_refinement_residual(banks, j, std::vector<int>{m}, 3), 1e-10);
  }
}

TEST(Gram, HaarIndicator) {
  const auto f = cascade(kHaar1, 6);
  EXPECT_NEAR(gram_check(f, f, std::vector<Int>{0}), 1.0, 1e-15);
  EXPECT_EQ(gram_check(f, f, std::vector<Int>{1}), 0.0);
  const auto g = cascade(kHaar1, 5);
  EXPECT_THROW(gram_check(f, g, std::vector<Int>{0}), Error);
}

TEST(Gram, ShearedScalingFunctionIsOrthonormal) {
  for (const auto& b : sheared_banks()) {
    const auto f = cascade(SubdivisionOp(b.xi, b.lowpass()), 6);
    EXPECT_NEAR(gram_check(f, f, std::vector<Int>{0, 0}), 1.0, 5e-2);
    EXPECT_NEAR(gram_check(f, f, std::vector<Int>{1, 0}), 0.0, 5e-2);
    EXPECT_NEAR(gram_check(f, f, std::vector<Int>{0, 1}), 0.0, 5e-2);
  }
}
