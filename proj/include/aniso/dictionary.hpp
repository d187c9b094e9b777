#pragma once

// Univariate orthogonal filter families and the anisotropic filterbank
// builder: tensor the univariate filters along the Smith values and pull them
// back through Θ1, b_η = g_η(Θ1^{-1} ·).

#include <aniso/lattice.hpp>
#include <aniso/seqcore.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace aniso {

/// σ-band orthogonal filter set; filters[0] is the lowpass.
struct UnivariateQMFSet {
  std::string name;
  Int sigma = 0;
  std::vector<CoefSeq> filters;
};

inline UnivariateQMFSet haar() {
  return {"haar", 2, {CoefSeq::univariate({1.0, 1.0}), CoefSeq::univariate({1.0, -1.0})}};
}

/// Daubechies filters of order 2 (dilation 2), normalized to sum 2.
inline UnivariateQMFSet daubechies2() {
  const double r3 = std::sqrt(3.0);
  return {"db2",
          2,
          {CoefSeq::univariate({(1 + r3) / 4, (3 + r3) / 4, (3 - r3) / 4, (1 - r3) / 4}),
           CoefSeq::univariate({(1 - r3) / 4, (-3 + r3) / 4, (3 + r3) / 4, (-1 - r3) / 4})}};
}

/// Chui–Lian ternary orthogonal filters (dilation 3), lowpass sums to 3.
inline UnivariateQMFSet chui_lian_ternary() {
  const double r57 = std::sqrt(57.0);
  const double r2 = std::sqrt(2.0);
  const double k = std::sqrt(11.0 - r57) / 144.0;
  return {"cl3",
          3,
          {CoefSeq::univariate({(3 + r57) / 18, (9 + r57) / 18, (15 + r57) / 18, (15 - r57) / 18, (9 - r57) / 18,
                                (3 - r57) / 18}),
           CoefSeq::univariate({-r2 / 2, r2, -r2 / 2, 0.0, 0.0, 0.0}),
           CoefSeq::univariate({k * (-21 + r57), k * (-6 - 2 * r57), k * (9 - 5 * r57), k * (48 + 8 * r57),
                                k * (6 + 2 * r57), k * (-36 - 4 * r57)})}};
}

inline UnivariateQMFSet family_by_name(std::string_view name) {
  if (name == "haar") return haar();
  if (name == "db2") return daubechies2();
  if (name == "cl3") return chui_lian_ternary();
  fail(Errc::parse_error, "unknown filter family '" + std::string(name) + "'");
}

/// Largest cross-QMF deviation over all pairs of the set.
inline double qmf_residual(const UnivariateQMFSet& set) {
  const IntMatrix xi = IntMatrix::diagonal({set.sigma});
  double r = 0;
  for (std::size_t k = 0; k < set.filters.size(); ++k)
    for (std::size_t l = 0; l < set.filters.size(); ++l)
      r = std::max(r, cross_qmf_residual(set.filters[k], set.filters[l], xi, k == l));
  return r;
}

namespace detail {

// All exponent vectors of total degree exactly `deg` in s variables.
inline std::vector<IntVec> monomials_of_degree(int s, int deg) {
  std::vector<IntVec> out;
  IntVec e(s, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == s - 1) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[i] = k;
      self(self, i + 1, left - k);
    }
  };
  rec(rec, 0, deg);
  return out;
}

inline std::vector<IntVec> monomials_up_to(int s, int deg) {
  std::vector<IntVec> out;
  for (int d = 0; d <= deg; ++d)
    for (auto& m : monomials_of_degree(s, d)) out.push_back(std::move(m));
  return out;
}

}  // namespace detail

/// Largest n such that Σ_α α^β f(α) = 0 for all |β| < n, with a scale-aware
/// 1e-10 tolerance. Lowpass filters (Σ f ≠ 0) have order 0.
inline int moment_order(const CoefSeq& f, double tol = 1e-10, int max_order = 12) {
  for (int k = 0; k < max_order; ++k) {
    for (const IntVec& beta : detail::monomials_of_degree(f.dim(), k)) {
      double acc = 0, scale = 0;
      for_each_index(f.box(), [&](const IntVec& a, std::size_t flat) {
        double mono = 1;
        for (int i = 0; i < f.dim(); ++i) mono *= std::pow(double(a[i]), double(beta[i]));
        acc += mono * f.data()[flat];
        scale += std::abs(mono * f.data()[flat]);
      });
      if (std::abs(acc) > tol * std::max(1.0, scale)) return k;
    }
  }
  return max_order;
}

/// Critically sampled QMF filterbank for an arbitrary dilation Ξ = Θ1 Σ Θ2.
struct AnisoFilterBank {
  IntMatrix xi;
  SmithFactorization fact;
  std::vector<IntVec> etas;      // η ∈ ℤ_Σ, mixed radix, last coordinate fastest
  std::vector<CoefSeq> filters;  // filters[0] is the lowpass b_0
  std::vector<int> moments;      // discrete vanishing-moment order per η
  std::vector<std::string> families;

  std::size_t size() const noexcept { return filters.size(); }
  int dim() const noexcept { return xi.dim(); }
  const CoefSeq& lowpass() const { return filters.at(0); }
  Int det_abs() const { return std::abs(determinant(xi)); }

  std::size_t index_of(std::span<const Int> eta) const {
    if (eta.size() != fact.sigma.size()) fail(Errc::bad_index, "η has wrong length");
    std::size_t k = 0;
    for (std::size_t j = 0; j < eta.size(); ++j) {
      if (eta[j] < 0 || eta[j] >= std::abs(fact.sigma[j])) fail(Errc::bad_index, "η out of range");
      k = k * std::size_t(std::abs(fact.sigma[j])) + std::size_t(eta[j]);
    }
    return k;
  }

  /// Unsheared tensor filter g_η = b_η(Θ1 ·).
  CoefSeq tensor_filter(std::size_t k) const { return reindex(filters.at(k), fact.theta1); }
};

/// Builds b_η = (⊗_j g_j^{η_j})(Θ1^{-1} ·) for a given Smith factorization.
inline AnisoFilterBank build_bank(const SmithFactorization& fact, std::span<const UnivariateQMFSet> sets) {
  const int s = fact.theta1.dim();
  if (sets.size() != std::size_t(s)) fail(Errc::dim_mismatch, "need one univariate set per axis");
  for (int j = 0; j < s; ++j) {
    if (sets[j].sigma != std::abs(fact.sigma[j]))
      fail(Errc::scale_mismatch, "set '" + sets[j].name + "' has scale " + std::to_string(sets[j].sigma) +
                                     ", Smith value is " + std::to_string(fact.sigma[j]));
    if (sets[j].filters.size() != std::size_t(sets[j].sigma))
      fail(Errc::scale_mismatch, "set '" + sets[j].name + "' is not critically sampled");
  }
  if (!is_unimodular(fact.theta1) || !is_unimodular(fact.theta2))
    fail(Errc::not_unimodular, "Smith factors must be unimodular");

  AnisoFilterBank bank;
  bank.xi = fact.product();
  bank.fact = fact;
  for (const auto& set : sets) bank.families.push_back(set.name);

  const IntMatrix pullback = inverse_unimodular(fact.theta1);
  IntVec eta(s, 0);
  while (true) {
    std::vector<CoefSeq> factors;
    for (int j = 0; j < s; ++j) factors.push_back(sets[j].filters[eta[j]]);
    bank.etas.push_back(eta);
    bank.filters.push_back(reindex(tensor(factors), pullback));
    bank.moments.push_back(moment_order(bank.filters.back()));
    int j = s - 1;
    while (j >= 0 && eta[j] == sets[j].sigma - 1) eta[j] = 0, --j;
    if (j < 0) break;
    ++eta[j];
  }
  return bank;
}

inline AnisoFilterBank build_bank(const IntMatrix& xi, std::span<const Int> target_sigma,
                                  std::span<const UnivariateQMFSet> sets) {
  if (target_sigma.size() != std::size_t(xi.dim()) || sets.size() != std::size_t(xi.dim()))
    fail(Errc::dim_mismatch, "target/sets length must match dimension");
  for (std::size_t j = 0; j < sets.size(); ++j)
    if (sets[j].sigma != std::abs(target_sigma[j]))
      fail(Errc::scale_mismatch, "set '" + sets[j].name + "' does not match target scale");
  return build_bank(smith_with_target(xi, target_sigma), sets);
}

/// Largest cross-QMF deviation over all ordered filter pairs; also reports
/// the worst pair.
struct QMFMatrixReport {
  std::vector<std::vector<double>> residual;
  double max_residual = 0;
  std::size_t worst_i = 0, worst_j = 0;
};

inline QMFMatrixReport qmf_matrix(const AnisoFilterBank& bank) {
  QMFMatrixReport r;
  const std::size_t n = bank.size();
  r.residual.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = cross_qmf_residual(bank.filters[i], bank.filters[j], bank.xi, i == j);
      r.residual[i][j] = v;
      if (v > r.max_residual) r.max_residual = v, r.worst_i = i, r.worst_j = j;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Polynomial reproduction / vanishing moments

namespace detail {

// Cells γ whose analysis window Ξγ + supp(f) lies inside w.
inline std::vector<IntVec> analysis_core(const IntMatrix& xi, const CoefSeq& f, const Window& w) {
  const int s = xi.dim();
  IntVec lo(s), hi(s);
  const IntVec fhi = f.hi();
  for (int i = 0; i < s; ++i) {
    lo[i] = w.lo[i] - f.origin()[i];
    hi[i] = w.hi[i] - fhi[i];
    if (lo[i] > hi[i]) return {};
  }
  std::vector<IntVec> core;
  for_each_index(preimage_box(xi, {lo, hi}), [&](const IntVec& g, std::size_t) {
    const IntVec x = xi * g;
    bool in = true;
    for (int i = 0; i < s && in; ++i) in = x[i] >= lo[i] && x[i] <= hi[i];
    if (in) core.push_back(g);
  });
  return core;
}

// Output cells β of S_{Ξ,mask} c whose every contribution comes from inside w.
inline std::vector<IntVec> subdivision_core(const IntMatrix& xi, const CoefSeq& mask, const Window& w,
                                            const Window& out_box) {
  const int s = xi.dim();
  const Int det = determinant(xi);
  const IntMatrix adj = adjugate(xi);
  std::vector<IntVec> core;
  IntVec v(s);
  for_each_index(out_box, [&](const IntVec& beta, std::size_t) {
    bool ok = true;
    for_each_index(mask.box(), [&](const IntVec& g, std::size_t ff) {
      if (!ok || mask.data()[ff] == 0.0) return;
      for (int i = 0; i < s; ++i) v[i] = beta[i] - g[i];
      const IntVec num = adj * v;
      for (int i = 0; i < s; ++i)
        if (num[i] % det != 0) return;  // β − γ ∉ Ξℤ^s
      IntVec alpha(s);
      for (int i = 0; i < s; ++i) alpha[i] = num[i] / det;
      if (!w.contains(alpha)) ok = false;
    });
    if (ok) core.push_back(beta);
  });
  return core;
}

// Max residual of a least-squares fit by polynomials of total degree <= deg.
inline double polynomial_fit_residual(const CoefSeq& values, const std::vector<IntVec>& pts, int deg) {
  if (pts.empty()) return 0;
  const int s = values.dim();
  const auto basis = monomials_up_to(s, deg);
  IntVec center(s, 0);
  double scale = 1;
  for (int i = 0; i < s; ++i) {
    Int lo = pts[0][i], hi = pts[0][i];
    for (const auto& p : pts) lo = std::min(lo, p[i]), hi = std::max(hi, p[i]);
    center[i] = (lo + hi) / 2;
    scale = std::max(scale, double(hi - lo) / 2);
  }
  Eigen::MatrixXd a(pts.size(), basis.size());
  Eigen::VectorXd b(pts.size());
  for (std::size_t r = 0; r < pts.size(); ++r) {
    for (std::size_t c = 0; c < basis.size(); ++c) {
      double m = 1;
      for (int i = 0; i < s; ++i) m *= std::pow(double(pts[r][i] - center[i]) / scale, double(basis[c][i]));
      a(Eigen::Index(r), Eigen::Index(c)) = m;
    }
    b(Eigen::Index(r)) = values.at(pts[r]);
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  return (a * x - b).cwiseAbs().maxCoeff();
}

}  // namespace detail

struct MonomialCheck {
  IntVec exponents;
  double max_detail = 0;          // over all η ≠ 0 on the analysis core
  std::size_t worst_eta = 0;
  double fit_residual = 0;        // S_{Ξ,b0} p minus its best polynomial fit, on the core
  double fit_scale = 0;           // max |S_{Ξ,b0} p| on the core
};

struct ReproductionReport {
  int degree = 0;
  std::vector<MonomialCheck> monomials;
  double max_detail = 0;
  double max_relative_fit_residual = 0;

  bool passed(double tol = 1e-10) const { return max_detail <= tol; }
};

/// Checks vanishing moments of the highpass channels and polynomial
/// reproduction of the lowpass subdivision for all monomials of total degree
/// <= degree, sampled on the window. Details are analysis coefficients
/// |det Ξ|^{-1} Σ_α b_η(α) p(Ξγ + α), evaluated where no zero padding enters.
inline ReproductionReport reproduction_check(const AnisoFilterBank& bank, int degree, const Window& w) {
  if (w.dim() != bank.dim()) fail(Errc::dim_mismatch, "window dimension");
  const double inv_det = 1.0 / double(bank.det_abs());
  ReproductionReport report;
  report.degree = degree;

  std::vector<std::vector<IntVec>> cores;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    cores.push_back(detail::analysis_core(bank.xi, bank.filters[k], w));
    if (k > 0 && cores.back().empty()) fail(Errc::window_too_small, "analysis core is empty");
  }

  for (const IntVec& e : detail::monomials_up_to(bank.dim(), degree)) {
    const CoefSeq p = sample_polynomial({{1.0, e}}, w);
    MonomialCheck mc{e};
    for (std::size_t k = 1; k < bank.size(); ++k) {
      const CoefSeq d = filter_downsample(p, bank.filters[k], bank.xi);
      for (const auto& g : cores[k]) {
        const double v = std::abs(d.at(g)) * inv_det;
        if (v > mc.max_detail) mc.max_detail = v, mc.worst_eta = k;
      }
    }
    const CoefSeq sp = upsample_filter(p, bank.lowpass(), bank.xi);
    const auto core = detail::subdivision_core(bank.xi, bank.lowpass(), w, sp.box());
    if (core.empty()) fail(Errc::window_too_small, "subdivision core is empty");
    for (const auto& b : core) mc.fit_scale = std::max(mc.fit_scale, std::abs(sp.at(b)));
    int total = 0;
    for (Int v : e) total += int(v);
    mc.fit_residual = detail::polynomial_fit_residual(sp, core, total);

    report.max_detail = std::max(report.max_detail, mc.max_detail);
    report.max_relative_fit_residual =
        std::max(report.max_relative_fit_residual, mc.fit_residual / std::max(1.0, mc.fit_scale));
    report.monomials.push_back(std::move(mc));
  }
  return report;
}

}  // namespace aniso
