#pragma once

// Subdivision operators and cascade sampling of refinable limit functions.
// A cascade S^r δ at level r samples the limit φ at Xi_total^{-1} α.

#include <aniso/dictionary.hpp>
#include <aniso/lattice.hpp>
#include <aniso/seqcore.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

namespace aniso {

inline constexpr std::size_t kDefaultCellCap = 100'000'000;

struct GridOptions {
  std::size_t cell_cap = kDefaultCellCap;
};

struct SubdivisionOp {
  IntMatrix xi;
  CoefSeq mask;

  SubdivisionOp(IntMatrix xi_, CoefSeq mask_) : xi(std::move(xi_)), mask(std::move(mask_)) {
    if (mask.dim() != xi.dim()) fail(Errc::dim_mismatch, "mask and dilation dimensions differ");
    if (!is_expansive(xi)) fail(Errc::bad_scales, "dilation is not expansive");
  }
};

struct SampledFunction {
  int level = 0;
  IntMatrix xi_total;
  CoefSeq values;

  Window window() const { return values.box(); }

  /// Point x = Xi_total^{-1} α at which values(α) samples the limit.
  std::vector<double> argument(std::span<const Int> alpha) const {
    const RatMatrix inv = inverse(xi_total);
    std::vector<double> x(alpha.size(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      Rational acc = 0;
      for (std::size_t k = 0; k < alpha.size(); ++k) acc += inv(int(i), int(k)) * alpha[k];
      x[i] = acc.convert_to<double>();
    }
    return x;
  }
};

namespace detail {

inline std::size_t cell_count(const Window& w) {
  std::size_t n = 1;
  for (Int e : w.shape()) {
    if (e > 0 && n > std::numeric_limits<std::size_t>::max() / std::size_t(e)) return std::numeric_limits<std::size_t>::max();
    n *= std::size_t(e);
  }
  return n;
}

// Support box of S_{Ξ,mask} applied to a sequence with box w.
inline Window subdivided_box(const IntMatrix& xi, const CoefSeq& mask, const Window& w) {
  Window img = image_box(xi, w);
  const IntVec mhi = mask.hi();
  for (int i = 0; i < xi.dim(); ++i) {
    img.lo[i] = checked_add(img.lo[i], mask.origin()[i]);
    img.hi[i] = checked_add(img.hi[i], mhi[i]);
  }
  return img;
}

inline void guard(const Window& w, const GridOptions& opt) {
  const std::size_t n = cell_count(w);
  if (n > opt.cell_cap)
    fail(Errc::grid_too_large, std::to_string(n) + " cells exceed the cap of " + std::to_string(opt.cell_cap));
}

}  // namespace detail

inline CoefSeq subdivide(const SubdivisionOp& op, const CoefSeq& c) { return upsample_filter(c, op.mask, op.xi); }

/// Applies S_{Ξ,mask} to c, r times, refusing grids above the cell cap.
inline CoefSeq iterate(const IntMatrix& xi, const CoefSeq& mask, CoefSeq c, int r, const GridOptions& opt = {}) {
  Window w = c.box();
  for (int k = 0; k < r; ++k) {
    w = detail::subdivided_box(xi, mask, w);
    detail::guard(w, opt);
  }
  for (int k = 0; k < r; ++k) c = upsample_filter(c, mask, xi);
  return c;
}

/// S^r δ with Xi_total = Ξ^r.
inline SampledFunction cascade(const SubdivisionOp& op, int r, const GridOptions& opt = {}) {
  if (r < 0) fail(Errc::bad_index, "negative level");
  return {r, power(op.xi, r), iterate(op.xi, op.mask, delta(op.xi.dim()), r, opt)};
}

/// Samples of ψ_η = Σ_α b_η(α) φ(Ξ· − α): one step with b_η, then r − 1
/// lowpass steps. η = 0 gives the scaling function.
inline SampledFunction wavelet_samples(const AnisoFilterBank& bank, std::size_t eta, int r, const GridOptions& opt = {}) {
  if (eta >= bank.size()) fail(Errc::bad_index, "no filter with index " + std::to_string(eta));
  if (r < 1) fail(Errc::bad_index, "wavelet samples need r >= 1");
  return {r, power(bank.xi, r), iterate(bank.xi, bank.lowpass(), bank.filters[eta], r - 1, opt)};
}

struct ConvergenceReport {
  std::vector<double> d;     // d[k] belongs to r = k + 1
  double decay_rate = 0;     // fitted geometric ratio of d_r over r >= 2
  bool strictly_decreasing_from(int r0) const {
    for (std::size_t k = std::size_t(r0); k < d.size(); ++k)
      if (!(d[k] < d[k - 1])) return false;
    return true;
  }
};

/// d_r = max_α |S^r δ(α) − S^{r+1} δ(Ξα)| for r = 1..r_max−1. Since
/// S^{r+1} δ(Ξα) = Σ_β a(Ξ(α − β)) S^r δ(β), each term needs only level r.
inline ConvergenceReport convergence_diagnostic(const SubdivisionOp& op, int r_max, const GridOptions& opt = {}) {
  if (r_max < 2) fail(Errc::bad_index, "r_max must be at least 2");
  const CoefSeq coarse_mask = downsample(op.mask, op.xi);  // a(Ξ·)
  ConvergenceReport rep;
  CoefSeq c = iterate(op.xi, op.mask, delta(op.xi.dim()), 1, opt);
  for (int r = 1; r < r_max; ++r) {
    rep.d.push_back(max_abs_diff(c, convolve(coarse_mask, c)));
    if (r + 1 < r_max) c = iterate(op.xi, op.mask, std::move(c), 1, opt);
  }
  // least squares fit of log d_r = const + r log ρ over the positive tail
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 1; k < rep.d.size(); ++k)
    if (rep.d[k] > 0) pts.emplace_back(double(k + 1), std::log(rep.d[k]));
  if (pts.size() >= 2) {
    Eigen::MatrixXd a(pts.size(), 2);
    Eigen::VectorXd b(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      a(Eigen::Index(i), 0) = 1;
      a(Eigen::Index(i), 1) = pts[i].first;
      b(Eigen::Index(i)) = pts[i].second;
    }
    rep.decay_rate = std::exp(a.colPivHouseholderQr().solve(b)(1));
  }
  return rep;
}

/// max |S^r_{Ξ,a} δ − D_{Θ1^{-1}} (S_{ΣΛ,h})^r D_{Θ1} δ| on the window (default:
/// hull of both supports), with a = b_0, Λ = Θ2 Θ1 and h = a(Θ1 ·).
inline double conjugation_check(const AnisoFilterBank& bank, int r, std::optional<Window> window = {},
                                const GridOptions& opt = {}) {
  const int s = bank.dim();
  const IntMatrix& t1 = bank.fact.theta1;
  const IntMatrix lambda = bank.fact.theta2 * t1;
  const IntMatrix sig_lambda = IntMatrix::diagonal(bank.fact.sigma) * lambda;
  const CoefSeq h = reindex(bank.lowpass(), t1);

  const CoefSeq lhs = iterate(bank.xi, bank.lowpass(), delta(s), r, opt);
  CoefSeq rhs = iterate(sig_lambda, h, reindex(delta(s), t1), r, opt);
  rhs = reindex(rhs, inverse_unimodular(t1));

  const Window w = window ? *window : hull(lhs.box(), rhs.box());
  double m = 0;
  for_each_index(w, [&](const IntVec& a, std::size_t) { m = std::max(m, std::abs(lhs.at(a) - rhs.at(a))); });
  return m;
}

/// Finite-level sample of φ_μ: apply the lowpass steps of banks d_1, ..., d_n
/// (d_1 first), then r_tail steps of bank 0. Xi_total = Ξ_0^{r_tail} Ξ_{d_n}···Ξ_{d_1}.
inline SampledFunction multiple_limit(std::span<const AnisoFilterBank> banks, std::span<const int> mu, int r_tail,
                                      const GridOptions& opt = {}) {
  if (banks.empty()) fail(Errc::bad_digit, "no banks");
  if (r_tail < 0) fail(Errc::bad_index, "negative tail level");
  const int s = banks[0].dim();
  for (int d : mu)
    if (d < 0 || std::size_t(d) >= banks.size()) fail(Errc::bad_digit, "digit " + std::to_string(d) + " out of range");

  Window w = delta(s).box();
  for (int d : mu) w = detail::subdivided_box(banks[d].xi, banks[d].lowpass(), w), detail::guard(w, opt);
  for (int k = 0; k < r_tail; ++k)
    w = detail::subdivided_box(banks[0].xi, banks[0].lowpass(), w), detail::guard(w, opt);

  CoefSeq c = delta(s);
  IntMatrix total = IntMatrix::identity(s);
  for (int d : mu) {
    c = upsample_filter(c, banks[d].lowpass(), banks[d].xi);
    total = banks[d].xi * total;
  }
  for (int k = 0; k < r_tail; ++k) {
    c = upsample_filter(c, banks[0].lowpass(), banks[0].xi);
    total = banks[0].xi * total;
  }
  return {int(mu.size()) + r_tail, total, std::move(c)};
}

/// Sampled check of φ_{(j,μ)} = Σ_α b_0^j(α) φ_μ(Ξ_j · − α). At a finite
/// level the left side is F_{(j,μ)} and the right side is
/// (b_0^j ↑ M_μ) * F_μ, where M_μ is the Xi_total of F_μ; returns max |diff|.
inline double joint_refinement_residual(std::span<const AnisoFilterBank> banks, int j, std::span<const int> mu,
                                        int r_tail, const GridOptions& opt = {}) {
  if (j < 0 || std::size_t(j) >= banks.size()) fail(Errc::bad_digit, "digit out of range");
  std::vector<int> jmu{j};
  jmu.insert(jmu.end(), mu.begin(), mu.end());
  const SampledFunction lhs = multiple_limit(banks, jmu, r_tail, opt);
  const SampledFunction fmu = multiple_limit(banks, mu, r_tail, opt);
  const CoefSeq rhs = convolve(upsample(banks[j].lowpass(), fmu.xi_total), fmu.values);
  if (!(lhs.xi_total == fmu.xi_total * banks[j].xi)) fail(Errc::grid_mismatch, "level bookkeeping");
  return max_abs_diff(lhs.values, rhs);
}

/// Riemann sum |det X|^{-1} Σ_α f(α) g(α − X·shift) for ⟨f, g(· − shift)⟩.
inline double gram_check(const SampledFunction& f, const SampledFunction& g, std::span<const Int> shift) {
  if (!(f.xi_total == g.xi_total)) fail(Errc::grid_mismatch, "samples live on different grids");
  if (shift.size() != std::size_t(f.values.dim())) fail(Errc::dim_mismatch, "shift dimension");
  const double det = std::abs(determinant_big(f.xi_total).convert_to<double>());
  const IntVec off = f.xi_total * shift;
  const int s = f.values.dim();
  IntVec y(s);
  double acc = 0;
  for_each_index(f.values.box(), [&](const IntVec& a, std::size_t flat) {
    const double v = f.values.data()[flat];
    if (v == 0.0) return;
    for (int i = 0; i < s; ++i) y[i] = a[i] - off[i];
    acc += v * g.values.at(y);
  });
  return acc / det;
}

}  // namespace aniso
