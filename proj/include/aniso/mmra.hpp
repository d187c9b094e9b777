#pragma once

// Orthogonal analysis/synthesis, multiple multiresolution trees over a shear
// family of dilations, and slope digit extraction.
//
// Analysis uses a_η = b_η(−·)/|det Ξ|, so c_η(γ) = |det Ξ|^{-1} Σ_α b_η(α) c(Ξγ + α)
// and synthesis is plain subdivision, Σ_η S_{Ξ,b_η} c_η.

#include <aniso/dictionary.hpp>
#include <aniso/lattice.hpp>
#include <aniso/seqcore.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace aniso {

/// All channels, indexed like bank.filters (0 is the approximation).
inline std::vector<CoefSeq> analyze(const AnisoFilterBank& bank, const CoefSeq& c) {
  if (c.dim() != bank.dim()) fail(Errc::dim_mismatch, "signal and bank dimensions differ");
  const double inv = 1.0 / double(bank.det_abs());
  std::vector<CoefSeq> parts;
  parts.reserve(bank.size());
  for (const auto& b : bank.filters) parts.push_back(scaled(filter_downsample(c, b, bank.xi), inv));
  return parts;
}

inline CoefSeq synthesize(const AnisoFilterBank& bank, std::span<const CoefSeq> parts) {
  if (parts.size() != bank.size()) fail(Errc::dim_mismatch, "need one part per channel");
  CoefSeq out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].dim() != bank.dim()) fail(Errc::dim_mismatch, "part dimension");
    CoefSeq y = upsample_filter(parts[k], bank.filters[k], bank.xi);
    out = k == 0 ? std::move(y) : add_scaled(out, y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configurations

struct MMRAConfig {
  DilationFamily family;
  std::vector<AnisoFilterBank> banks;  // banks[j] dilates by family.matrices[j]
  std::vector<std::string> families;   // one univariate family name per axis
  int depth = 1;                       // default full-tree depth

  int size() const noexcept { return static_cast<int>(banks.size()); }
  int dim() const noexcept { return family.dim; }
};

inline MMRAConfig make_config(Int sigma1, Int sigma2, int s, std::span<const int> signs,
                              const std::vector<std::string>& families, int depth = 1) {
  DilationFamily fam = dilation_family(sigma1, sigma2, s, signs);
  if (!joint_contraction_level(sigma1, sigma2))
    fail(Errc::bad_scales, "family is not jointly contractive within 8 levels");
  if (families.size() != std::size_t(s)) fail(Errc::dim_mismatch, "need one filter family per axis");
  std::vector<UnivariateQMFSet> sets;
  for (const auto& n : families) sets.push_back(family_by_name(n));
  MMRAConfig cfg{std::move(fam), {}, families, depth};
  for (int j = 0; j < cfg.family.size(); ++j) {
    cfg.banks.push_back(build_bank(cfg.family.factorization(j), sets));
    if (!(cfg.banks.back().xi == cfg.family.matrices[j])) throw std::logic_error("bank dilation mismatch");
  }
  return cfg;
}

/// Same configuration with the shears oriented by `signs` ∈ {0,1}^{s−1}.
inline MMRAConfig orthant_config(const MMRAConfig& base, std::span<const int> signs) {
  return make_config(base.family.sigma1, base.family.sigma2, base.family.dim, signs, base.families, base.depth);
}

/// FNV-1a hash of the configuration's defining parameters.
inline std::uint64_t config_hash(const MMRAConfig& cfg) {
  std::ostringstream os;
  os << cfg.family.sigma1 << ';' << cfg.family.sigma2 << ';' << cfg.family.dim << ';';
  for (int v : cfg.family.signs) os << v << ',';
  os << ';';
  for (const auto& f : cfg.families) os << f << ',';
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Decomposition trees

using DigitPath = std::vector<int>;

enum class TreeMode { full, path };

struct TreeNode {
  DigitPath path;
  Window window;                        // support box of the approximation at this node
  std::optional<Window> core;           // cells unaffected by zero padding; empty once it vanishes
  std::map<std::size_t, CoefSeq> details;  // channel index η ≥ 1 (empty at the root)
  std::optional<CoefSeq> approx;        // leaves only
  IntMatrix xi_product;                 // Ξ_ε = Ξ_{ε_k} ··· Ξ_{ε_1}
  double coefficient_scale = 1;         // sqrt|det Ξ_ε|: multiply to get orthonormal coefficients
};

struct DecompositionTree {
  TreeMode mode = TreeMode::full;
  int depth = 0;
  DigitPath path;  // path mode only
  Window signal_window;
  std::uint64_t config_hash = 0;
  std::map<DigitPath, TreeNode> nodes;

  const TreeNode& node(const DigitPath& p) const {
    auto it = nodes.find(p);
    if (it == nodes.end()) fail(Errc::incomplete_tree, "missing node");
    return it->second;
  }
};

namespace detail {

// A box of cells whose analysis windows for every filter of the bank lie in w.
// On a sheared lattice those cells form a parallelogram, so the bounding box is
// shrunk one face at a time, always cutting the face with the most outsiders.
inline std::optional<Window> core_box(const AnisoFilterBank& bank, const Window& w) {
  std::set<IntVec> cells;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const auto ck = analysis_core(bank.xi, bank.filters[k], w);
    std::set<IntVec> next;
    for (const auto& c : ck)
      if (k == 0 || cells.count(c)) next.insert(c);
    cells = std::move(next);
    if (cells.empty()) return std::nullopt;
  }
  const int s = bank.dim();
  Window b{*cells.begin(), *cells.begin()};
  for (const auto& c : cells)
    for (int i = 0; i < s; ++i) b.lo[i] = std::min(b.lo[i], c[i]), b.hi[i] = std::max(b.hi[i], c[i]);
  while (true) {
    // outsiders on each face: index 2i is the low face of axis i, 2i+1 the high face
    std::vector<std::size_t> out(2 * s, 0);
    bool clean = true;
    for_each_index(b, [&](const IntVec& g, std::size_t) {
      if (cells.count(g)) return;
      clean = false;
      for (int i = 0; i < s; ++i) out[2 * i] += g[i] == b.lo[i], out[2 * i + 1] += g[i] == b.hi[i];
    });
    if (clean) return b;
    const auto f = std::size_t(std::max_element(out.begin(), out.end()) - out.begin());
    const int i = int(f / 2);
    if (f % 2 == 0) ++b.lo[i]; else --b.hi[i];
    if (b.lo[i] > b.hi[i]) return std::nullopt;
  }
}

// Analyzes `approx` with bank j and fills in the child node.
inline TreeNode make_child(const MMRAConfig& cfg, const TreeNode& parent, const CoefSeq& approx, int j,
                           CoefSeq& child_approx) {
  const AnisoFilterBank& bank = cfg.banks[j];
  auto parts = analyze(bank, approx);
  TreeNode child;
  child.path = parent.path;
  child.path.push_back(j);
  child.xi_product = bank.xi * parent.xi_product;
  child.coefficient_scale = std::sqrt(std::abs(determinant_big(child.xi_product).convert_to<double>()));
  if (parent.core) child.core = core_box(bank, *parent.core);
  // Deeper levels may legitimately lose their core on small signals; only a
  // signal shorter than the filters themselves is rejected.
  if (!child.core && parent.path.empty()) fail(Errc::window_too_small, "signal is smaller than the filter support");
  child.window = parts[0].box();
  for (std::size_t k = 1; k < parts.size(); ++k) child.details.emplace(k, std::move(parts[k]));
  child_approx = std::move(parts[0]);
  return child;
}

inline TreeNode make_root(const MMRAConfig& cfg, const CoefSeq& signal) {
  if (signal.dim() != cfg.dim()) fail(Errc::dim_mismatch, "signal dimension");
  TreeNode root;
  root.window = signal.box();
  root.core = signal.box();
  root.xi_product = IntMatrix::identity(cfg.dim());
  return root;
}

}  // namespace detail

/// Full m-ary tree of depth L.
inline DecompositionTree decompose(const MMRAConfig& cfg, const CoefSeq& signal, int depth) {
  if (depth <= 0) fail(Errc::depth_zero, "full-tree depth must be at least 1");
  DecompositionTree tree{TreeMode::full, depth, {}, signal.box(), config_hash(cfg), {}};
  std::function<void(TreeNode, const CoefSeq&)> rec = [&](TreeNode node, const CoefSeq& approx) {
    if (int(node.path.size()) == depth) {
      node.approx = approx;
      tree.nodes.emplace(node.path, std::move(node));
      return;
    }
    for (int j = 0; j < cfg.size(); ++j) {
      CoefSeq child_approx;
      TreeNode child = detail::make_child(cfg, node, approx, j, child_approx);
      rec(std::move(child), child_approx);
    }
    tree.nodes.emplace(node.path, std::move(node));
  };
  rec(detail::make_root(cfg, signal), signal);
  return tree;
}

/// Single chain along the digit path; an empty path keeps the signal at the root.
inline DecompositionTree decompose_path(const MMRAConfig& cfg, const CoefSeq& signal, std::span<const int> path) {
  check_digits(cfg.family, path);
  DecompositionTree tree{TreeMode::path, int(path.size()), DigitPath(path.begin(), path.end()), signal.box(),
                         config_hash(cfg), {}};
  TreeNode node = detail::make_root(cfg, signal);
  CoefSeq approx = signal;
  for (int j : path) {
    CoefSeq next;
    TreeNode child = detail::make_child(cfg, node, approx, j, next);
    tree.nodes.emplace(node.path, std::move(node));
    node = std::move(child);
    approx = std::move(next);
  }
  node.approx = std::move(approx);
  tree.nodes.emplace(node.path, std::move(node));
  return tree;
}

inline constexpr double kBranchAgreementTol = 1e-8;

/// Bottom-up synthesis. In full mode every node is rebuilt from each of its
/// children and the branches must agree; branch 0 is returned.
inline CoefSeq reconstruct(const MMRAConfig& cfg, const DecompositionTree& tree) {
  if (tree.config_hash != config_hash(cfg)) fail(Errc::inconsistent_tree, "tree was built with another configuration");
  auto child_parts = [&](const TreeNode& child, CoefSeq approx) {
    const AnisoFilterBank& bank = cfg.banks[child.path.back()];
    std::vector<CoefSeq> parts(bank.size());
    parts[0] = std::move(approx);
    for (std::size_t k = 1; k < bank.size(); ++k) {
      auto it = child.details.find(k);
      if (it == child.details.end()) fail(Errc::incomplete_tree, "missing detail channel");
      parts[k] = it->second;
    }
    return crop(synthesize(bank, parts), tree.node(DigitPath(child.path.begin(), child.path.end() - 1)).window);
  };

  if (tree.mode == TreeMode::path) {
    const TreeNode* node = &tree.node(tree.path);
    if (!node->approx) fail(Errc::incomplete_tree, "leaf has no approximation");
    CoefSeq approx = *node->approx;
    for (std::size_t k = tree.path.size(); k > 0; --k) {
      approx = child_parts(*node, std::move(approx));
      node = &tree.node(DigitPath(tree.path.begin(), tree.path.begin() + long(k) - 1));
    }
    return approx;
  }

  std::function<CoefSeq(const TreeNode&)> rec = [&](const TreeNode& node) -> CoefSeq {
    if (int(node.path.size()) == tree.depth) {
      if (!node.approx) fail(Errc::incomplete_tree, "leaf has no approximation");
      return *node.approx;
    }
    std::optional<CoefSeq> first;
    for (int j = 0; j < cfg.size(); ++j) {
      DigitPath p = node.path;
      p.push_back(j);
      const TreeNode& child = tree.node(p);
      CoefSeq y = child_parts(child, rec(child));
      if (!first) {
        first = std::move(y);
        continue;
      }
      const double scale = std::max(1.0, max_abs(*first));
      const double diff = max_abs_diff(*first, y);
      if (diff > kBranchAgreementTol * scale)
        fail(Errc::inconsistent_tree, "branch " + std::to_string(j) + " disagrees by " + std::to_string(diff));
    }
    return std::move(*first);
  };
  return rec(tree.node({}));
}

// ---------------------------------------------------------------------------
// Slope resolution

/// Orientation s_j of the vertex of h_j(𝕊): +1 for shear sign η_j = 0.
inline int vertex_sign(const DilationFamily& f, int axis) { return -f.shear_sign(axis + 1); }

/// h_j(w) = r w + (1 − r) s_j e_j with r = σ2/σ1 (h_0(w) = r w).
inline std::vector<double> h_map(const DilationFamily& f, int j, std::span<const double> w) {
  const double r = double(f.sigma2) / double(f.sigma1);
  std::vector<double> out(w.begin(), w.end());
  for (double& v : out) v *= r;
  if (j > 0) out[j - 1] += (1 - r) * vertex_sign(f, j - 1);
  return out;
}

inline std::vector<double> h_inverse(const DilationFamily& f, int j, std::span<const double> t) {
  const double r = double(f.sigma2) / double(f.sigma1);
  std::vector<double> out(t.begin(), t.end());
  if (j > 0) out[j - 1] -= (1 - r) * vertex_sign(f, j - 1);
  for (double& v : out) v /= r;
  return out;
}

/// h_ε = h_{ε_1} ∘ ··· ∘ h_{ε_n}, the composition with σ2^n Ξ_ε^{-1} (w, 1)ᵀ = (h_ε(w), 1)ᵀ
/// for Ξ_ε = Ξ_{ε_n} ··· Ξ_{ε_1}: the first digit is the outermost map.
inline std::vector<double> h_eps(const DilationFamily& f, std::span<const int> eps, std::span<const double> w) {
  check_digits(f, eps);
  std::vector<double> v(w.begin(), w.end());
  for (auto it = eps.rbegin(); it != eps.rend(); ++it) v = h_map(f, *it, v);
  return v;
}

namespace detail {

inline void check_slope_dim(const DilationFamily& f, std::span<const double> w) {
  if (w.size() != std::size_t(f.dim - 1)) fail(Errc::dim_mismatch, "slope vectors have s-1 entries");
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace detail

/// ‖w2 − h_ε(w)‖_2.
inline double slope_error(const DilationFamily& f, std::span<const int> eps, std::span<const double> w,
                          std::span<const double> w2) {
  detail::check_slope_dim(f, w);
  detail::check_slope_dim(f, w2);
  return detail::dist(w2, h_eps(f, eps, w));
}

/// The same error through the closed form of Ξ_ε^{-1}: σ2^n Ξ_ε^{-1} (w, 1)ᵀ.
inline double slope_error_closed_form(const DilationFamily& f, std::span<const int> eps, std::span<const double> w,
                                      std::span<const double> w2) {
  detail::check_slope_dim(f, w);
  detail::check_slope_dim(f, w2);
  const RatMatrix inv = xi_inverse_closed_form(f, eps);
  const Rational s2n = pow(BigInt(f.sigma2), int(eps.size()));
  const int last = f.dim - 1;
  double acc = 0;
  for (int i = 0; i < last; ++i) {
    const double diag = Rational(s2n * inv(i, i)).convert_to<double>();
    const double off = Rational(s2n * inv(i, last)).convert_to<double>();
    const double v = diag * w[i] + off;
    acc += (w2[i] - v) * (w2[i] - v);
  }
  return std::sqrt(acc);
}

/// Membership in the (signed) simplex {x : s_i x_i ≥ 0, Σ s_i x_i ≤ 1}.
inline bool in_simplex(const DilationFamily& f, std::span<const double> w, double tol = 1e-12) {
  if (w.size() != std::size_t(f.dim - 1)) return false;
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double y = w[i] * vertex_sign(f, int(i));
    if (y < -tol) return false;
    total += y;
  }
  return total <= 1 + tol;
}

/// Euclidean projection onto the signed simplex.
inline std::vector<double> project_to_simplex(const DilationFamily& f, std::span<const double> w) {
  const std::size_t d = w.size();
  std::vector<double> y(d);
  double total = 0;
  for (std::size_t i = 0; i < d; ++i) {
    y[i] = std::max(0.0, w[i] * vertex_sign(f, int(i)));
    total += y[i];
  }
  if (total > 1) {
    // projection onto {y ≥ 0, Σ y = 1}
    std::vector<double> u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = w[i] * vertex_sign(f, int(i));
    std::vector<double> sorted = u;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0, theta = 0;
    for (std::size_t k = 0; k < d; ++k) {
      cum += sorted[k];
      const double t = (cum - 1) / double(k + 1);
      if (sorted[k] - t > 0) theta = t;
    }
    for (std::size_t i = 0; i < d; ++i) y[i] = std::max(0.0, u[i] - theta);
  }
  for (std::size_t i = 0; i < d; ++i) y[i] *= vertex_sign(f, int(i));
  return y;
}

inline double distance_to_simplex(const DilationFamily& f, std::span<const double> w) {
  return detail::dist(w, project_to_simplex(f, w));
}

struct SlopeDigits {
  std::vector<int> eps;  // Ξ_ε = Ξ_{ε_n} ··· Ξ_{ε_1}; ε_1 is the outermost contraction
  int n = 0;
  double achieved_error = 0;
  std::vector<double> w;
  std::vector<double> w2;
};

enum class SlopeSearch {
  exact,   // shortest length with error < δ, best string at that length
  greedy,  // nearest-cell descent with clamping
};

/// Predicted digit count ⌈log(δ / diam 𝕊) / log(σ2/σ1)⌉ (at least 1).
inline int expected_slope_length(const DilationFamily& f, double delta) {
  const double r = double(f.sigma2) / double(f.sigma1);
  const double diam = f.dim == 2 ? 1.0 : std::sqrt(2.0);
  return std::max(1, int(std::ceil(std::log(delta / diam) / std::log(r))));
}

namespace detail {

// Best digit string of length n (outer digits chosen first) with error below
// `bound`; returns its error or +inf.
inline double slope_dfs(const DilationFamily& f, std::span<const double> w, const std::vector<double>& t, int left,
                        double rk, double bound, std::vector<int>& cur, std::vector<int>& best) {
  if (left == 0) {
    const double e = rk * dist(t, w);
    if (e < bound) {
      best = cur;
      return e;
    }
    return std::numeric_limits<double>::infinity();
  }
  double found = std::numeric_limits<double>::infinity();
  const double r = double(f.sigma2) / double(f.sigma1);
  for (int j = 0; j < f.size(); ++j) {
    std::vector<double> tj = h_inverse(f, j, t);
    const double lb = rk * r * distance_to_simplex(f, tj);
    if (lb >= std::min(bound, found)) continue;
    cur.push_back(j);
    const double e = slope_dfs(f, w, tj, left - 1, rk * r, std::min(bound, found), cur, best);
    cur.pop_back();
    found = std::min(found, e);
  }
  return found;
}

}  // namespace detail

/// Digits ε with ‖w2 − h_ε(w)‖ < δ for w, w2 in the family's simplex.
inline SlopeDigits slope_digits(const DilationFamily& f, std::span<const double> w, std::span<const double> w2,
                                double delta, SlopeSearch mode = SlopeSearch::exact) {
  detail::check_slope_dim(f, w);
  detail::check_slope_dim(f, w2);
  if (!(delta > 0)) fail(Errc::bad_index, "delta must be positive");
  if (!in_simplex(f, w)) fail(Errc::out_of_simplex, "reference slope outside the simplex");
  if (!in_simplex(f, w2)) fail(Errc::out_of_simplex, "target slope outside the simplex");
  const int cap = 10 * expected_slope_length(f, delta);

  SlopeDigits out{{}, 0, 0, {w.begin(), w.end()}, {w2.begin(), w2.end()}};
  if (mode == SlopeSearch::greedy) {
    const double r = double(f.sigma2) / double(f.sigma1);
    std::vector<double> t(w2.begin(), w2.end());
    while (true) {
      int best_j = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < f.size(); ++j) {
        const double d = r * distance_to_simplex(f, h_inverse(f, j, t));
        if (d < best_d) best_d = d, best_j = j;
      }
      t = project_to_simplex(f, h_inverse(f, best_j, t));
      out.eps.push_back(best_j);
      if (slope_error(f, out.eps, w, w2) < delta) break;
      if (int(out.eps.size()) >= cap) fail(Errc::non_termination, "greedy slope search exceeded its cap");
    }
  } else {
    for (int n = 1;; ++n) {
      if (n > cap) fail(Errc::non_termination, "slope search exceeded its cap");
      std::vector<int> cur, best;
      const double e = detail::slope_dfs(f, w, {w2.begin(), w2.end()}, n, 1.0, delta, cur, best);
      if (e < delta) {
        out.eps = best;
        break;
      }
    }
  }
  out.n = int(out.eps.size());
  out.achieved_error = slope_error(f, out.eps, w, w2);
  return out;
}

}  // namespace aniso
