#pragma once

// Finitely supported sequences on ℤ^s and the multirate lattice operations
// built on them. A CoefSeq is a dense box: an origin (lowest corner) and a
// shape, with values stored row-major (last coordinate fastest). Lookups
// outside the box return zero.

#include <aniso/lattice.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace aniso {

/// Inclusive integer box [lo, hi].
struct Window {
  IntVec lo;
  IntVec hi;

  Window() = default;
  Window(IntVec lo_, IntVec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) fail(Errc::dim_mismatch, "window corners");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) fail(Errc::bad_index, "window has lo > hi");
  }

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  IntVec shape() const {
    IntVec s(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) s[i] = hi[i] - lo[i] + 1;
    return s;
  }
  bool contains(std::span<const Int> a) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (a[i] < lo[i] || a[i] > hi[i]) return false;
    return true;
  }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Smallest window containing both.
inline Window hull(const Window& a, const Window& b) {
  if (a.dim() != b.dim()) fail(Errc::dim_mismatch, "window hull");
  Window w = a;
  for (int i = 0; i < a.dim(); ++i) {
    w.lo[i] = std::min(a.lo[i], b.lo[i]);
    w.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return w;
}

/// Bounding box of {M x : x ∈ w}.
inline Window image_box(const IntMatrix& m, const Window& w) {
  if (m.dim() != w.dim()) fail(Errc::dim_mismatch, "image box");
  const int s = m.dim();
  IntVec lo(s, 0), hi(s, 0);
  for (int i = 0; i < s; ++i)
    for (int k = 0; k < s; ++k) {
      const Int a = checked_mul(m(i, k), w.lo[k]);
      const Int b = checked_mul(m(i, k), w.hi[k]);
      lo[i] = checked_add(lo[i], std::min(a, b));
      hi[i] = checked_add(hi[i], std::max(a, b));
    }
  return {lo, hi};
}

/// Bounding box of the integer points x with M x ∈ w (M invertible).
inline Window preimage_box(const IntMatrix& m, const Window& w) {
  const Int det = determinant(m);
  if (det == 0) fail(Errc::singular_matrix, "preimage box");
  const IntMatrix adj = adjugate(m);
  Window num = image_box(adj, w);  // M^{-1} x = adj x / det
  const int s = m.dim();
  IntVec lo(s), hi(s);
  for (int i = 0; i < s; ++i) {
    Int a = num.lo[i], b = num.hi[i];
    if (det < 0) std::swap(a, b);
    lo[i] = ceil_div(a, det);
    hi[i] = floor_div(b, det);
    if (lo[i] > hi[i]) hi[i] = lo[i];  // empty preimage; keep a valid one-cell box
  }
  return {lo, hi};
}

class CoefSeq {
 public:
  CoefSeq() = default;

  CoefSeq(IntVec origin, IntVec shape) : origin_(std::move(origin)), shape_(std::move(shape)) {
    if (origin_.size() != shape_.size() || origin_.empty()) fail(Errc::dim_mismatch, "origin/shape");
    std::size_t n = 1;
    for (Int e : shape_) {
      if (e < 1) fail(Errc::bad_index, "shape entries must be positive");
      n *= static_cast<std::size_t>(e);
    }
    data_.assign(n, 0.0);
    init_strides();
  }

  CoefSeq(IntVec origin, IntVec shape, std::vector<double> data) : CoefSeq(std::move(origin), std::move(shape)) {
    if (data.size() != data_.size()) fail(Errc::dim_mismatch, "data length does not match shape");
    data_ = std::move(data);
  }

  explicit CoefSeq(const Window& w) : CoefSeq(w.lo, w.shape()) {}

  static CoefSeq univariate(std::vector<double> values, Int origin = 0) {
    const Int n = static_cast<Int>(values.size());
    return CoefSeq({origin}, {n}, std::move(values));
  }

  int dim() const noexcept { return static_cast<int>(origin_.size()); }
  const IntVec& origin() const noexcept { return origin_; }
  const IntVec& shape() const noexcept { return shape_; }
  const IntVec& strides() const noexcept { return strides_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  IntVec hi() const {
    IntVec h(origin_.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = origin_[i] + shape_[i] - 1;
    return h;
  }
  Window box() const { return {origin_, hi()}; }

  bool contains(std::span<const Int> a) const {
    for (std::size_t i = 0; i < origin_.size(); ++i)
      if (a[i] < origin_[i] || a[i] >= origin_[i] + shape_[i]) return false;
    return true;
  }

  std::size_t flat(std::span<const Int> a) const {
    Int f = 0;
    for (std::size_t i = 0; i < origin_.size(); ++i) f += (a[i] - origin_[i]) * strides_[i];
    return static_cast<std::size_t>(f);
  }

  double at(std::span<const Int> a) const {
    if (a.size() != origin_.size()) fail(Errc::dim_mismatch, "index dimension");
    return contains(a) ? data_[flat(a)] : 0.0;
  }
  double at(std::initializer_list<Int> a) const { return at(std::span<const Int>(a.begin(), a.size())); }

  /// Mutable access; the index must lie inside the box.
  double& ref(std::span<const Int> a) {
    if (a.size() != origin_.size() || !contains(a)) fail(Errc::bad_index, "index outside support box");
    return data_[flat(a)];
  }

  friend bool operator==(const CoefSeq&, const CoefSeq&) = default;

 private:
  void init_strides() {
    strides_.assign(shape_.size(), 1);
    for (int i = static_cast<int>(shape_.size()) - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * shape_[i + 1];
  }

  IntVec origin_;
  IntVec shape_;
  IntVec strides_;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Box iteration

/// Calls f(index, flat) for every cell of the box, last coordinate fastest.
template <class F>
void for_each_index(const Window& w, F&& f) {
  const int s = w.dim();
  IntVec idx = w.lo;
  std::size_t flat = 0;
  while (true) {
    f(std::as_const(idx), flat);
    ++flat;
    int i = s - 1;
    while (i >= 0 && idx[i] == w.hi[i]) idx[i] = w.lo[i], --i;
    if (i < 0) return;
    ++idx[i];
  }
}

namespace detail {

// Flat offset in `target` of M x + t, for x in the source coordinates, is
// affine in x: base + Σ_k weight_k x_k. Returns {weights, base}.
inline std::pair<IntVec, Int> affine_offsets(const IntMatrix& m, const IntVec& t, const CoefSeq& target) {
  const int s = m.dim();
  IntVec w(s, 0);
  Int base = 0;
  for (int i = 0; i < s; ++i) {
    for (int k = 0; k < s; ++k) w[k] += m(i, k) * target.strides()[i];
    base += (t[i] - target.origin()[i]) * target.strides()[i];
  }
  return {w, base};
}

// Visits the nonzero cells of `src` together with the affine target offset.
template <class F>
void for_each_nonzero_affine(const CoefSeq& src, const IntVec& weights, Int base, F&& f) {
  const int s = src.dim();
  const Window w = src.box();
  IntVec idx = w.lo;
  Int off = base;
  for (int k = 0; k < s; ++k) off += weights[k] * idx[k];
  const auto data = src.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] != 0.0) f(data[flat], off);
    int i = s - 1;
    while (i >= 0 && idx[i] == w.hi[i]) {
      off -= weights[i] * (w.hi[i] - w.lo[i]);
      idx[i] = w.lo[i];
      --i;
    }
    if (i < 0) break;
    ++idx[i];
    off += weights[i];
  }
}

// Nonzero taps of `mask` as (value, flat offset in target relative to mask origin).
inline std::vector<std::pair<double, Int>> tap_offsets(const CoefSeq& mask, const CoefSeq& target, int sign = 1) {
  std::vector<std::pair<double, Int>> taps;
  for_each_index(mask.box(), [&](const IntVec& g, std::size_t flat) {
    const double v = mask.data()[flat];
    if (v == 0.0) return;
    Int off = 0;
    for (int i = 0; i < mask.dim(); ++i) off += sign * (g[i] - mask.origin()[i]) * target.strides()[i];
    taps.emplace_back(v, off);
  });
  return taps;
}

inline void check_same_dim(const CoefSeq& a, const CoefSeq& b, const char* what) {
  if (a.dim() != b.dim()) fail(Errc::dim_mismatch, what);
}

inline void check_xi(const CoefSeq& c, const IntMatrix& xi, const char* what) {
  if (c.dim() != xi.dim()) fail(Errc::dim_mismatch, what);
  if (determinant_big(xi) == 0) fail(Errc::singular_matrix, what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise helpers

inline CoefSeq delta(int s) { return CoefSeq(IntVec(s, 0), IntVec(s, 1), {1.0}); }

inline double sum(const CoefSeq& c) { return std::accumulate(c.data().begin(), c.data().end(), 0.0); }

inline double norm2_squared(const CoefSeq& c) {
  double acc = 0;
  for (double v : c.data()) acc += v * v;
  return acc;
}

inline double max_abs(const CoefSeq& c) {
  double m = 0;
  for (double v : c.data()) m = std::max(m, std::abs(v));
  return m;
}

/// Restriction to a window (zero where the window leaves the support).
inline CoefSeq crop(const CoefSeq& c, const Window& w) {
  if (c.dim() != w.dim()) fail(Errc::dim_mismatch, "crop");
  CoefSeq out(w);
  for_each_index(w, [&](const IntVec& a, std::size_t flat) { out.data()[flat] = c.at(a); });
  return out;
}

/// a + k b on the hull of both boxes.
inline CoefSeq add_scaled(const CoefSeq& a, const CoefSeq& b, double k = 1.0) {
  detail::check_same_dim(a, b, "add");
  CoefSeq out = crop(a, hull(a.box(), b.box()));
  for_each_index(b.box(), [&](const IntVec& idx, std::size_t flat) { out.data()[out.flat(idx)] += k * b.data()[flat]; });
  return out;
}

inline CoefSeq scaled(CoefSeq c, double k) {
  for (double& v : c.data()) v *= k;
  return c;
}

/// max |a - b| over the union of both supports.
inline double max_abs_diff(const CoefSeq& a, const CoefSeq& b) {
  detail::check_same_dim(a, b, "difference");
  double m = 0;
  for_each_index(a.box(), [&](const IntVec& idx, std::size_t flat) { m = std::max(m, std::abs(a.data()[flat] - b.at(idx))); });
  for_each_index(b.box(), [&](const IntVec& idx, std::size_t flat) {
    if (!a.contains(idx)) m = std::max(m, std::abs(b.data()[flat]));
  });
  return m;
}

/// Shrinks the box to the cells with |value| > tol (a single zero cell at the
/// origin if nothing survives).
inline CoefSeq trimmed(const CoefSeq& c, double tol = 0.0) {
  const int s = c.dim();
  IntVec lo(s, std::numeric_limits<Int>::max()), hi(s, std::numeric_limits<Int>::min());
  bool any = false;
  for_each_index(c.box(), [&](const IntVec& a, std::size_t flat) {
    if (std::abs(c.data()[flat]) <= tol) return;
    any = true;
    for (int i = 0; i < s; ++i) lo[i] = std::min(lo[i], a[i]), hi[i] = std::max(hi[i], a[i]);
  });
  if (!any) return CoefSeq(c.origin(), IntVec(s, 1));
  return crop(c, {lo, hi});
}

// ---------------------------------------------------------------------------
// Multirate operations

/// (a * b)(γ) = Σ_α a(α) b(γ − α).
inline CoefSeq convolve(const CoefSeq& a, const CoefSeq& b) {
  detail::check_same_dim(a, b, "convolve");
  const int s = a.dim();
  IntVec origin(s), shape(s);
  for (int i = 0; i < s; ++i) {
    origin[i] = a.origin()[i] + b.origin()[i];
    shape[i] = a.shape()[i] + b.shape()[i] - 1;
  }
  CoefSeq out(origin, shape);
  const auto taps = detail::tap_offsets(b, out);
  const auto [w, base] = detail::affine_offsets(IntMatrix::identity(s), b.origin(), out);
  auto data = out.data();
  detail::for_each_nonzero_affine(a, w, base, [&](double v, Int off) {
    for (const auto& [t, o] : taps) data[off + o] += v * t;
  });
  return out;
}

/// (a ⋆ b)(γ) = Σ_α a(α) b(α − γ).
inline CoefSeq correlate(const CoefSeq& a, const CoefSeq& b) {
  detail::check_same_dim(a, b, "correlate");
  const int s = a.dim();
  IntVec origin(s), shape(s);
  const IntVec bhi = b.hi();
  for (int i = 0; i < s; ++i) {
    origin[i] = a.origin()[i] - bhi[i];
    shape[i] = a.shape()[i] + b.shape()[i] - 1;
  }
  CoefSeq out(origin, shape);
  // γ = α − β; β enters with negative sign relative to b's origin
  const auto taps = detail::tap_offsets(b, out, -1);
  IntVec shift(s);
  for (int i = 0; i < s; ++i) shift[i] = -b.origin()[i];
  const auto [w, base] = detail::affine_offsets(IntMatrix::identity(s), shift, out);
  auto data = out.data();
  detail::for_each_nonzero_affine(a, w, base, [&](double v, Int off) {
    for (const auto& [t, o] : taps) data[off + o] += v * t;
  });
  return out;
}

/// Σ_α mask(· − Ξα) c(α); the subdivision operator S_{Ξ,mask}, equivalently
/// filtering the Ξ-upsampled c with mask.
inline CoefSeq upsample_filter(const CoefSeq& c, const CoefSeq& mask, const IntMatrix& xi) {
  detail::check_same_dim(c, mask, "subdivide");
  detail::check_xi(c, xi, "subdivide");
  const int s = c.dim();
  Window img = image_box(xi, c.box());
  IntVec origin(s), shape(s);
  for (int i = 0; i < s; ++i) {
    origin[i] = img.lo[i] + mask.origin()[i];
    shape[i] = img.hi[i] - img.lo[i] + mask.shape()[i];
  }
  CoefSeq out(origin, shape);
  const auto taps = detail::tap_offsets(mask, out);
  const auto [w, base] = detail::affine_offsets(xi, mask.origin(), out);
  auto data = out.data();
  detail::for_each_nonzero_affine(c, w, base, [&](double v, Int off) {
    for (const auto& [t, o] : taps) data[off + o] += v * t;
  });
  return out;
}

/// γ ↦ Σ_α filter(α) c(Ξγ + α), i.e. ↓_Ξ(filter(−·) * c), on the box of all γ
/// whose window can touch the support of c.
inline CoefSeq filter_downsample(const CoefSeq& c, const CoefSeq& filter, const IntMatrix& xi) {
  detail::check_same_dim(c, filter, "analysis");
  detail::check_xi(c, xi, "analysis");
  const int s = c.dim();
  IntVec lo(s), hi(s);
  const IntVec chi = c.hi(), fhi = filter.hi();
  for (int i = 0; i < s; ++i) {
    lo[i] = c.origin()[i] - fhi[i];
    hi[i] = chi[i] - filter.origin()[i];
  }
  CoefSeq out(preimage_box(xi, {lo, hi}));
  const auto taps = detail::tap_offsets(filter, c);
  const auto cdata = c.data();
  const IntVec fshape = filter.shape();
  IntVec x(s);
  for_each_index(out.box(), [&](const IntVec& g, std::size_t flat) {
    for (int i = 0; i < s; ++i) {
      Int v = 0;
      for (int k = 0; k < s; ++k) v += xi(i, k) * g[k];
      x[i] = v + filter.origin()[i];  // lowest filter tap lands at Ξγ + origin
    }
    bool inside = true;
    for (int i = 0; i < s && inside; ++i)
      inside = x[i] >= c.origin()[i] && x[i] + fshape[i] - 1 <= chi[i];
    double acc = 0;
    if (inside) {
      const std::size_t base = c.flat(x);
      for (const auto& [t, o] : taps) acc += t * cdata[base + o];
    } else {
      IntVec y(s);
      for_each_index(filter.box(), [&](const IntVec& a, std::size_t ff) {
        const double t = filter.data()[ff];
        if (t == 0.0) return;
        for (int i = 0; i < s; ++i) y[i] = x[i] + a[i] - filter.origin()[i];
        acc += t * c.at(y);
      });
    }
    out.data()[flat] = acc;
  });
  return out;
}

/// result(α) = c(Ξα).
inline CoefSeq downsample(const CoefSeq& c, const IntMatrix& xi) {
  detail::check_xi(c, xi, "downsample");
  CoefSeq out(preimage_box(xi, c.box()));
  for_each_index(out.box(), [&](const IntVec& a, std::size_t flat) { out.data()[flat] = c.at(xi * a); });
  return out;
}

/// result(Ξα) = c(α), zero off the sublattice Ξℤ^s.
inline CoefSeq upsample(const CoefSeq& c, const IntMatrix& xi) { return upsample_filter(c, delta(c.dim()), xi); }

/// result(α) = c(Θα) for unimodular Θ.
inline CoefSeq reindex(const CoefSeq& c, const IntMatrix& theta) {
  if (c.dim() != theta.dim()) fail(Errc::dim_mismatch, "reindex");
  const IntMatrix inv = inverse_unimodular(theta);
  CoefSeq out(image_box(inv, c.box()));
  const auto [w, base] = detail::affine_offsets(inv, IntVec(c.dim(), 0), out);
  auto data = out.data();
  detail::for_each_nonzero_affine(c, w, base, [&](double v, Int off) { data[off] = v; });
  return out;
}

/// h(α) = Π_j h_j(α_j).
inline CoefSeq tensor(std::span<const CoefSeq> factors) {
  if (factors.empty()) fail(Errc::dim_mismatch, "tensor of no factors");
  IntVec origin, shape;
  for (const auto& f : factors) {
    if (f.dim() != 1) fail(Errc::dim_mismatch, "tensor factors must be univariate");
    origin.push_back(f.origin()[0]);
    shape.push_back(f.shape()[0]);
  }
  CoefSeq out(origin, shape);
  for_each_index(out.box(), [&](const IntVec& a, std::size_t flat) {
    double v = 1.0;
    for (std::size_t j = 0; j < factors.size(); ++j) v *= factors[j].data()[a[j] - origin[j]];
    out.data()[flat] = v;
  });
  return out;
}

inline CoefSeq tensor(std::initializer_list<CoefSeq> factors) {
  return tensor(std::span<const CoefSeq>(factors.begin(), factors.size()));
}

/// max_γ |Σ_α b(α) b2(α − Ξγ) − |det Ξ| δ_{same} δ(γ)|.
inline double cross_qmf_residual(const CoefSeq& b, const CoefSeq& b2, const IntMatrix& xi, bool same) {
  detail::check_same_dim(b, b2, "cross QMF");
  detail::check_xi(b, xi, "cross QMF");
  const double d = std::abs(static_cast<double>(determinant(xi)));
  // Σ_α b(α) b2(α − Ξγ) = Σ_β b2(β) b(Ξγ + β)
  const CoefSeq lag = filter_downsample(b, b2, xi);
  const IntVec zero(b.dim(), 0);
  const double expect0 = same ? d : 0.0;
  double r = lag.contains(zero) ? 0.0 : expect0;
  for_each_index(lag.box(), [&](const IntVec& g, std::size_t flat) {
    const bool origin = std::all_of(g.begin(), g.end(), [](Int v) { return v == 0; });
    r = std::max(r, std::abs(lag.data()[flat] - (origin ? expect0 : 0.0)));
  });
  return r;
}

inline double qmf_residual(const CoefSeq& a, const IntMatrix& xi) { return cross_qmf_residual(a, a, xi, true); }

struct Monomial {
  double coef = 1.0;
  IntVec exponents;
};
using Polynomial = std::vector<Monomial>;

inline double evaluate(const Polynomial& p, std::span<const Int> x) {
  double v = 0;
  for (const auto& m : p) {
    double t = m.coef;
    for (std::size_t i = 0; i < m.exponents.size(); ++i) t *= std::pow(double(x[i]), double(m.exponents[i]));
    v += t;
  }
  return v;
}

/// p|_{ℤ^s} restricted to the window.
inline CoefSeq sample_polynomial(const Polynomial& p, const Window& w) {
  for (const auto& m : p)
    if (m.exponents.size() != std::size_t(w.dim())) fail(Errc::dim_mismatch, "monomial dimension");
  CoefSeq out(w);
  for_each_index(w, [&](const IntVec& a, std::size_t flat) { out.data()[flat] = evaluate(p, a); });
  return out;
}

}  // namespace aniso
