#pragma once

// Exact integer-matrix algebra: Smith factorizations, unimodularity,
// expansiveness, coset enumeration and the shear/dilation families
// Ξ_j = Γ_j^{-1} Ξ_0 Γ_j together with their iterated products.

#include <aniso/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aniso {

using IntVec = std::vector<Int>;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int floor_div(Int a, Int b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int ceil_div(Int a, Int b) { return -floor_div(-a, b); }

inline Int to_int(const BigInt& v) {
  if (v > std::numeric_limits<Int>::max() || v < std::numeric_limits<Int>::min())
    fail(Errc::overflow, "value does not fit in 64 bits");
  return static_cast<Int>(v);
}

/// Square integer matrix, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0) {}
  IntMatrix(std::initializer_list<std::initializer_list<Int>> rows) {
    dim_ = static_cast<int>(rows.size());
    a_.reserve(rows.size() * rows.size());
    for (const auto& r : rows) {
      if (r.size() != rows.size()) fail(Errc::dim_mismatch, "matrix is not square");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static IntMatrix from_rows(const std::vector<IntVec>& rows) {
    IntMatrix m(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) fail(Errc::dim_mismatch, "matrix is not square");
      for (std::size_t j = 0; j < rows.size(); ++j) m(int(i), int(j)) = rows[i][j];
    }
    return m;
  }

  static IntMatrix identity(int dim) {
    IntMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix diagonal(std::span<const Int> d) {
    IntMatrix m(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
    return m;
  }
  static IntMatrix diagonal(std::initializer_list<Int> d) {
    return diagonal(std::span<const Int>(d.begin(), d.size()));
  }

  int dim() const noexcept { return dim_; }
  Int operator()(int i, int j) const { return a_[std::size_t(i) * dim_ + j]; }
  Int& operator()(int i, int j) { return a_[std::size_t(i) * dim_ + j]; }

  std::vector<IntVec> rows() const {
    std::vector<IntVec> r(dim_, IntVec(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r[i][j] = (*this)(i, j);
    return r;
  }

  IntVec diagonal_entries() const {
    IntVec d(dim_);
    for (int i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
    return d;
  }

  IntMatrix transposed() const {
    IntMatrix t(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_upper_triangular() const {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < i; ++j)
        if ((*this)(i, j) != 0) return false;
    return true;
  }

  bool is_diagonal() const { return is_upper_triangular() && transposed().is_upper_triangular(); }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  int dim_ = 0;
  std::vector<Int> a_;
};

inline IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.dim() != b.dim()) fail(Errc::dim_mismatch, "matrix product");
  const int s = a.dim();
  IntMatrix c(s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      Int acc = 0;
      for (int k = 0; k < s; ++k) acc = checked_add(acc, checked_mul(a(i, k), b(k, j)));
      c(i, j) = acc;
    }
  return c;
}

inline IntVec operator*(const IntMatrix& a, std::span<const Int> v) {
  if (static_cast<std::size_t>(a.dim()) != v.size()) fail(Errc::dim_mismatch, "matrix-vector product");
  IntVec r(v.size(), 0);
  for (int i = 0; i < a.dim(); ++i)
    for (int k = 0; k < a.dim(); ++k) r[i] = checked_add(r[i], checked_mul(a(i, k), v[k]));
  return r;
}

inline IntVec operator*(const IntMatrix& a, const IntVec& v) { return a * std::span<const Int>(v); }

inline IntMatrix power(const IntMatrix& m, int n) {
  IntMatrix r = IntMatrix::identity(m.dim());
  for (int i = 0; i < n; ++i) r = m * r;
  return r;
}

/// Fraction-free (Bareiss) determinant in arbitrary precision.
inline BigInt determinant_big(const IntMatrix& m) {
  const int s = m.dim();
  if (s == 0) return 1;
  std::vector<BigInt> a(std::size_t(s) * s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a[std::size_t(i) * s + j] = m(i, j);
  auto at = [&](int i, int j) -> BigInt& { return a[std::size_t(i) * s + j]; };
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k < s - 1; ++k) {
    if (at(k, k) == 0) {
      int p = k + 1;
      while (p < s && at(p, k) == 0) ++p;
      if (p == s) return 0;
      for (int j = 0; j < s; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < s; ++i)
      for (int j = k + 1; j < s; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  return sign * at(s - 1, s - 1);
}

inline Int determinant(const IntMatrix& m) { return to_int(determinant_big(m)); }

inline bool is_unimodular(const IntMatrix& m) {
  const BigInt d = determinant_big(m);
  return d == 1 || d == -1;
}

/// Adjugate, so that m * adjugate(m) = det(m) * I.
inline IntMatrix adjugate(const IntMatrix& m) {
  const int s = m.dim();
  IntMatrix adj(s);
  if (s == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      IntMatrix minor(s - 1);
      for (int r = 0, mr = 0; r < s; ++r) {
        if (r == j) continue;
        for (int c = 0, mc = 0; c < s; ++c) {
          if (c == i) continue;
          minor(mr, mc++) = m(r, c);
        }
        ++mr;
      }
      const Int cof = determinant(minor);
      adj(i, j) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  return adj;
}

/// Integer inverse of a unimodular matrix.
inline IntMatrix inverse_unimodular(const IntMatrix& m) {
  const Int d = determinant(m);
  if (d != 1 && d != -1) fail(Errc::not_unimodular, "matrix has |det| = " + std::to_string(d < 0 ? -d : d));
  IntMatrix adj = adjugate(m);
  if (d == -1)
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j) adj(i, j) = -adj(i, j);
  return adj;
}

// ---------------------------------------------------------------------------
// Exact rationals

class RatMatrix {
 public:
  RatMatrix() = default;
  explicit RatMatrix(int dim) : dim_(dim), a_(std::size_t(dim) * dim) {}
  explicit RatMatrix(const IntMatrix& m) : RatMatrix(m.dim()) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) = m(i, j);
  }

  static RatMatrix identity(int dim) {
    RatMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1;
    return m;
  }

  int dim() const noexcept { return dim_; }
  const Rational& operator()(int i, int j) const { return a_[std::size_t(i) * dim_ + j]; }
  Rational& operator()(int i, int j) { return a_[std::size_t(i) * dim_ + j]; }

  friend bool operator==(const RatMatrix&, const RatMatrix&) = default;

  /// Maximum absolute column sum (induced 1-norm).
  Rational norm_1() const {
    Rational best = 0;
    for (int j = 0; j < dim_; ++j) {
      Rational col = 0;
      for (int i = 0; i < dim_; ++i) col += abs((*this)(i, j));
      best = std::max(best, col);
    }
    return best;
  }

  /// Maximum absolute row sum (induced ∞-norm).
  Rational norm_inf() const {
    Rational best = 0;
    for (int i = 0; i < dim_; ++i) {
      Rational row = 0;
      for (int j = 0; j < dim_; ++j) row += abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  std::vector<std::vector<double>> to_double() const {
    std::vector<std::vector<double>> r(dim_, std::vector<double>(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r[i][j] = static_cast<double>((*this)(i, j));
    return r;
  }

 private:
  int dim_ = 0;
  std::vector<Rational> a_;
};

inline RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.dim() != b.dim()) fail(Errc::dim_mismatch, "rational matrix product");
  const int s = a.dim();
  RatMatrix c(s);
  for (int i = 0; i < s; ++i)
    for (int k = 0; k < s; ++k) {
      if (a(i, k) == 0) continue;
      for (int j = 0; j < s; ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

/// Gauss-Jordan inverse over the rationals.
inline RatMatrix inverse(const RatMatrix& m) {
  const int s = m.dim();
  RatMatrix a = m, inv = RatMatrix::identity(s);
  for (int c = 0; c < s; ++c) {
    int p = c;
    while (p < s && a(p, c) == 0) ++p;
    if (p == s) fail(Errc::singular_matrix, "matrix is not invertible");
    if (p != c)
      for (int j = 0; j < s; ++j) {
        std::swap(a(p, j), a(c, j));
        std::swap(inv(p, j), inv(c, j));
      }
    const Rational piv = a(c, c);
    for (int j = 0; j < s; ++j) {
      a(c, j) /= piv;
      inv(c, j) /= piv;
    }
    for (int i = 0; i < s; ++i) {
      if (i == c || a(i, c) == 0) continue;
      const Rational f = a(i, c);
      for (int j = 0; j < s; ++j) {
        a(i, j) -= f * a(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

inline RatMatrix inverse(const IntMatrix& m) { return inverse(RatMatrix(m)); }

// ---------------------------------------------------------------------------
// Expansiveness

namespace detail {

inline bool has_eigenvalue(const IntMatrix& m, Int lambda) {
  IntMatrix shifted = m;
  for (int i = 0; i < m.dim(); ++i) shifted(i, i) = checked_sub(shifted(i, i), lambda);
  return determinant_big(shifted) == 0;
}

}  // namespace detail

inline constexpr int kExpansiveIterationCap = 64;

/// True iff all eigenvalues of m exceed one in modulus. Decided exactly by
/// powers of m^{-1} in rational arithmetic; throws Inconclusive if the cap is
/// reached without a certificate either way.
inline bool is_expansive(const IntMatrix& m, int cap = kExpansiveIterationCap) {
  const BigInt det = determinant_big(m);
  if (det == 0) fail(Errc::singular_matrix, "expansiveness of a singular matrix");
  // |det| = product of |eigenvalues|; |det| <= 1 leaves one of modulus <= 1.
  if (det == 1 || det == -1) return false;
  if (m.is_upper_triangular() || m.transposed().is_upper_triangular()) {
    for (Int d : m.diagonal_entries())
      if (d >= -1 && d <= 1) return false;
    return true;
  }
  if (detail::has_eigenvalue(m, 1) || detail::has_eigenvalue(m, -1)) return false;

  const RatMatrix inv = inverse(m);
  RatMatrix p = inv;
  for (int k = 1; k <= cap; ++k) {
    if (p.norm_inf() < 1) return true;
    p = p * inv;
  }
  fail(Errc::inconclusive, "no contraction certificate within " + std::to_string(cap) + " powers");
}

// ---------------------------------------------------------------------------
// Smith factorizations

struct SmithFactorization {
  IntMatrix theta1;
  IntVec sigma;
  IntMatrix theta2;

  IntMatrix product() const { return theta1 * IntMatrix::diagonal(sigma) * theta2; }
  friend bool operator==(const SmithFactorization&, const SmithFactorization&) = default;
};

/// Checks that f is a valid Smith factorization of m.
inline bool verifies(const SmithFactorization& f, const IntMatrix& m) {
  return f.theta1.dim() == m.dim() && f.theta2.dim() == m.dim() &&
         f.sigma.size() == std::size_t(m.dim()) && is_unimodular(f.theta1) &&
         is_unimodular(f.theta2) && f.product() == m;
}

/// Smith normal form by Gauss elimination with division by remainder and total
/// pivoting. Maintains m == theta1 * a * theta2 throughout.
inline SmithFactorization smith_normal_form(const IntMatrix& m) {
  const int s = m.dim();
  IntMatrix a = m;
  IntMatrix t1 = IntMatrix::identity(s);
  IntMatrix t2 = IntMatrix::identity(s);

  // row_i += k * row_j
  auto row_add = [&](int i, int j, Int k) {
    for (int c = 0; c < s; ++c) a(i, c) = checked_add(a(i, c), checked_mul(k, a(j, c)));
    for (int r = 0; r < s; ++r) t1(r, j) = checked_sub(t1(r, j), checked_mul(k, t1(r, i)));
  };
  auto row_swap = [&](int i, int j) {
    if (i == j) return;
    for (int c = 0; c < s; ++c) std::swap(a(i, c), a(j, c));
    for (int r = 0; r < s; ++r) std::swap(t1(r, i), t1(r, j));
  };
  auto row_negate = [&](int i) {
    for (int c = 0; c < s; ++c) a(i, c) = -a(i, c);
    for (int r = 0; r < s; ++r) t1(r, i) = -t1(r, i);
  };
  // col_i += k * col_j
  auto col_add = [&](int i, int j, Int k) {
    for (int r = 0; r < s; ++r) a(r, i) = checked_add(a(r, i), checked_mul(k, a(r, j)));
    for (int c = 0; c < s; ++c) t2(j, c) = checked_sub(t2(j, c), checked_mul(k, t2(i, c)));
  };
  auto col_swap = [&](int i, int j) {
    if (i == j) return;
    for (int r = 0; r < s; ++r) std::swap(a(r, i), a(r, j));
    for (int c = 0; c < s; ++c) std::swap(t2(i, c), t2(j, c));
  };

  for (int t = 0; t < s; ++t) {
    bool done = false;
    while (!done) {
      int pi = -1, pj = -1;
      for (int i = t; i < s; ++i)
        for (int j = t; j < s; ++j)
          if (a(i, j) != 0 && (pi < 0 || std::abs(a(i, j)) < std::abs(a(pi, pj)))) {
            pi = i;
            pj = j;
          }
      if (pi < 0) break;  // remaining block is zero
      row_swap(t, pi);
      col_swap(t, pj);

      bool clean = true;
      for (int i = t + 1; i < s; ++i) {
        if (a(i, t) == 0) continue;
        row_add(i, t, -(a(i, t) / a(t, t)));
        if (a(i, t) != 0) clean = false;
      }
      for (int j = t + 1; j < s; ++j) {
        if (a(t, j) == 0) continue;
        col_add(j, t, -(a(t, j) / a(t, t)));
        if (a(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // divisibility chain: the pivot must divide the whole trailing block
      done = true;
      for (int i = t + 1; i < s && done; ++i)
        for (int j = t + 1; j < s; ++j)
          if (a(i, j) % a(t, t) != 0) {
            row_add(t, i, 1);
            done = false;
            break;
          }
    }
    if (a(t, t) < 0) row_negate(t);
  }

  SmithFactorization f{t1, a.diagonal_entries(), t2};
  if (f.product() != m) throw std::logic_error("smith_normal_form: reconstruction failed");
  return f;
}

namespace detail {

// Solves m * u = u * diag(d) for unit upper-triangular integer u, given m upper
// triangular with diagonal d.
inline std::optional<IntMatrix> upper_similarity(const IntMatrix& m, const IntVec& d) {
  const int s = m.dim();
  if (!m.is_upper_triangular() || m.diagonal_entries() != d) return std::nullopt;
  IntMatrix u = IntMatrix::identity(s);
  for (int k = 0; k < s; ++k)
    for (int i = k - 1; i >= 0; --i) {
      Int rhs = 0;
      for (int l = i + 1; l <= k; ++l) rhs = checked_add(rhs, checked_mul(m(i, l), u(l, k)));
      const Int den = checked_sub(d[k], d[i]);
      if (den == 0) {
        if (rhs != 0) return std::nullopt;
        u(i, k) = 0;
      } else {
        if (rhs % den != 0) return std::nullopt;
        u(i, k) = rhs / den;
      }
    }
  return u;
}

}  // namespace detail

/// Smith factorization m = Θ1 diag(target) Θ2 for a prescribed diagonal with
/// the same normal form as m.
inline SmithFactorization smith_with_target(const IntMatrix& m, std::span<const Int> target) {
  const int s = m.dim();
  if (target.size() != std::size_t(s)) fail(Errc::dim_mismatch, "target diagonal length");
  const IntVec tgt(target.begin(), target.end());
  const IntMatrix tdiag = IntMatrix::diagonal(tgt);

  const SmithFactorization nf_m = smith_normal_form(m);
  const SmithFactorization nf_t = smith_normal_form(tdiag);
  if (nf_m.sigma != nf_t.sigma) fail(Errc::incompatible_diagonal, "normal forms differ");

  const IntMatrix id = IntMatrix::identity(s);
  if (m == tdiag) return {id, tgt, id};

  // unimodular similarity for triangular inputs (the sheared dilations)
  if (auto u = detail::upper_similarity(m, tgt)) return {*u, tgt, inverse_unimodular(*u)};
  if (auto u = detail::upper_similarity(m.transposed(), tgt)) {
    const IntMatrix ut = u->transposed();
    return {inverse_unimodular(ut), tgt, ut};
  }

  // m = P S Q, diag(t) = L1 S L2  =>  m = (P L1^{-1}) diag(t) (L2^{-1} Q)
  SmithFactorization f{nf_m.theta1 * inverse_unimodular(nf_t.theta1), tgt,
                       inverse_unimodular(nf_t.theta2) * nf_m.theta2};
  if (f.product() != m) throw std::logic_error("smith_with_target: reconstruction failed");
  return f;
}

// ---------------------------------------------------------------------------
// Cosets

/// Integer points of Ξ[0,1)^s, one per coset of ℤ^s / Ξℤ^s. The first
/// coordinate varies fastest.
inline std::vector<IntVec> coset_representatives(const IntMatrix& xi) {
  const int s = xi.dim();
  const Int det = determinant(xi);
  if (det == 0) fail(Errc::singular_matrix, "coset representatives");
  const IntMatrix adj = adjugate(xi);

  IntVec lo(s, 0), hi(s, 0);
  for (int i = 0; i < s; ++i)
    for (int k = 0; k < s; ++k) {
      lo[i] += std::min<Int>(0, xi(i, k));
      hi[i] += std::max<Int>(0, xi(i, k));
    }

  std::vector<IntVec> reps;
  IntVec p = lo;
  while (true) {
    // Ξ^{-1} p = adj p / det must lie in [0,1)^s
    bool inside = true;
    for (int i = 0; i < s && inside; ++i) {
      Int v = 0;
      for (int k = 0; k < s; ++k) v = checked_add(v, checked_mul(adj(i, k), p[k]));
      inside = det > 0 ? (v >= 0 && v < det) : (v <= 0 && v > det);
    }
    if (inside) reps.push_back(p);
    int i = 0;
    while (i < s && p[i] == hi[i]) p[i] = lo[i], ++i;
    if (i == s) break;
    ++p[i];
  }
  return reps;
}

// ---------------------------------------------------------------------------
// Shear / dilation families

struct DilationFamily {
  Int sigma1 = 0;
  Int sigma2 = 0;
  int dim = 0;
  std::vector<int> signs;  // η ∈ {0,1}^{s-1}
  std::vector<IntMatrix> matrices;  // Ξ_0 … Ξ_{s-1}
  std::vector<IntMatrix> shears;    // Γ_0 … Γ_{s-1}

  int size() const noexcept { return static_cast<int>(matrices.size()); }

  /// Orientation of e_j in Γ_j: −1 for η_j = 0, +1 for η_j = 1 (e_0 = 0).
  int shear_sign(int j) const { return j == 0 ? 0 : (signs[j - 1] ? 1 : -1); }

  /// Ξ_j = Γ_j^{-1} Ξ_0 Γ_j as a Smith factorization with target diag(Ξ_0).
  SmithFactorization factorization(int j) const {
    return {inverse_unimodular(shears.at(j)), matrices[0].diagonal_entries(), shears[j]};
  }
};

inline DilationFamily dilation_family(Int sigma1, Int sigma2, int s, std::span<const int> signs = {}) {
  if (s < 2) fail(Errc::dim_mismatch, "dilation family needs s >= 2");
  if (!(sigma1 > sigma2 && sigma2 > 1)) fail(Errc::bad_scales, "need sigma1 > sigma2 > 1");
  std::vector<int> sg(signs.begin(), signs.end());
  if (sg.empty()) sg.assign(s - 1, 0);
  if (sg.size() != std::size_t(s - 1)) fail(Errc::dim_mismatch, "signs must have s-1 entries");
  for (int v : sg)
    if (v != 0 && v != 1) fail(Errc::bad_digit, "signs must be 0 or 1");

  DilationFamily f{sigma1, sigma2, s, sg, {}, {}};
  IntVec d(s, sigma1);
  d[s - 1] = sigma2;
  const IntMatrix xi0 = IntMatrix::diagonal(d);
  for (int j = 0; j < s; ++j) {
    IntMatrix gamma = IntMatrix::identity(s);
    if (j > 0) gamma(j - 1, s - 1) = f.shear_sign(j);
    f.shears.push_back(gamma);
    f.matrices.push_back(inverse_unimodular(gamma) * xi0 * gamma);
  }
  return f;
}

inline void check_digits(const DilationFamily& f, std::span<const int> eps) {
  for (int e : eps)
    if (e < 0 || e >= f.size()) fail(Errc::bad_digit, "digit " + std::to_string(e) + " out of range");
}

/// Ξ_ε = Ξ_{ε_n} ··· Ξ_{ε_1}.
inline IntMatrix xi_product(const DilationFamily& f, std::span<const int> eps) {
  check_digits(f, eps);
  IntMatrix p = IntMatrix::identity(f.dim);
  for (int e : eps) p = f.matrices[e] * p;
  return p;
}

/// Closed form of Ξ_ε^{-1}: [σ1^{-n} I, σ2^{-n} p_ε(σ2/σ1); 0, σ2^{-n}] with
/// p_ε(x) = (1-x) Σ_k x^{k-1} e_{ε_k} (e_j carrying the family's shear sign).
inline RatMatrix xi_inverse_closed_form(const DilationFamily& f, std::span<const int> eps) {
  check_digits(f, eps);
  const int s = f.dim;
  const int n = static_cast<int>(eps.size());
  const Rational x(f.sigma2, f.sigma1);

  std::vector<Rational> p(s - 1, Rational(0));
  Rational xpow = 1;
  for (int k = 0; k < n; ++k) {
    if (eps[k] > 0) p[eps[k] - 1] += xpow * Rational(-f.shear_sign(eps[k]));
    xpow *= x;
  }
  for (auto& v : p) v *= (1 - x);

  const Rational s1n = pow(BigInt(f.sigma1), n);
  const Rational s2n = pow(BigInt(f.sigma2), n);
  RatMatrix m(s);
  for (int i = 0; i < s - 1; ++i) {
    m(i, i) = 1 / s1n;
    m(i, s - 1) = p[i] / s2n;
  }
  m(s - 1, s - 1) = 1 / s2n;
  return m;
}

/// Exact n-th power of the joint contractivity bound:
/// max{1, 1 + (σ2/σ1)^n} / σ2^n.
inline Rational contractivity_bound_pow(Int sigma1, Int sigma2, int n) {
  if (!(sigma1 > sigma2 && sigma2 > 1)) fail(Errc::bad_scales, "need sigma1 > sigma2 > 1");
  const Rational ratio(sigma2, sigma1);
  Rational rn = 1;
  for (int k = 0; k < n; ++k) rn *= ratio;
  Rational s2n = 1;
  for (int k = 0; k < n; ++k) s2n *= sigma2;
  return std::max(Rational(1), Rational(1 + rn)) / s2n;
}

/// max{1, (1 + (σ2/σ1)^n)^{1/n}} / σ2, an upper bound for ‖Ξ_ε^{-1}‖^{1/n} in
/// the maximum absolute row sum norm (RatMatrix::norm_inf).
inline double contractivity_bound(Int sigma1, Int sigma2, int n) {
  if (!(sigma1 > sigma2 && sigma2 > 1)) fail(Errc::bad_scales, "need sigma1 > sigma2 > 1");
  if (n < 1) fail(Errc::bad_index, "n must be positive");
  const double r = double(sigma2) / double(sigma1);
  return std::max(1.0, std::pow(1.0 + std::pow(r, n), 1.0 / n)) / double(sigma2);
}

/// Smallest n <= n_max with contractivity bound < 1, if any.
inline std::optional<int> joint_contraction_level(Int sigma1, Int sigma2, int n_max = 8) {
  for (int n = 1; n <= n_max; ++n)
    if (contractivity_bound_pow(sigma1, sigma2, n) < 1) return n;
  return std::nullopt;
}

}  // namespace aniso
