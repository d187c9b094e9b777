// aniso: command-line front end for the anisotropic filterbank library.
//
// Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
// 3 resource cap exceeded.

#include <aniso/dictionary.hpp>
#include <aniso/io.hpp>
#include <aniso/lattice.hpp>
#include <aniso/mmra.hpp>
#include <aniso/subdivision.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace aniso;

namespace {

enum Exit { kOk = 0, kUsage = 1, kVerify = 2, kResource = 3 };

int exit_code(Errc e) {
  switch (e) {
    case Errc::incompatible_diagonal:
    case Errc::inconsistent_tree:
    case Errc::out_of_simplex:
      return kVerify;
    case Errc::grid_too_large:
    case Errc::non_termination:
      return kResource;
    default:
      return kUsage;
  }
}

GridOptions grid_options() {
  GridOptions opt;
  if (const char* cap = std::getenv("ANISO_CELL_CAP")) {
    try {
      opt.cell_cap = std::stoull(cap);
    } catch (const std::logic_error&) {
      fail(Errc::parse_error, "ANISO_CELL_CAP must be a positive integer");
    }
  }
  return opt;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

IntVec parse_ints(const std::string& s) {
  IntVec v;
  for (const auto& tok : split(s, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      fail(Errc::parse_error, "not an integer: '" + tok + "'");
    }
  }
  if (v.empty()) fail(Errc::parse_error, "empty integer list");
  return v;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  for (const auto& tok : split(s, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      fail(Errc::parse_error, "not a number: '" + tok + "'");
    }
  }
  return v;
}

/// "3,-1;0,2" or a JSON file holding {"rows": ...} or a bare array.
IntMatrix parse_matrix(const std::string& arg) {
  if (arg.find(';') == std::string::npos && arg.find(',') == std::string::npos && fs::exists(arg))
    return int_matrix_from_json(read_json(arg));
  std::vector<IntVec> rows;
  for (const auto& r : split(arg, ';')) rows.push_back(parse_ints(r));
  if (rows.empty()) fail(Errc::parse_error, "empty matrix");
  for (const auto& r : rows)
    if (r.size() != rows.size()) fail(Errc::dim_mismatch, "matrix is not square");
  return IntMatrix::from_rows(rows);
}

std::string format_matrix(const IntMatrix& m) {
  std::ostringstream os;
  for (const auto& r : m.rows()) {
    os << "  [";
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? " " : "") << r[k];
    os << "]\n";
  }
  return os.str();
}

std::string format_ints(std::span<const Int> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<UnivariateQMFSet> family_sets(const std::string& names) {
  std::vector<UnivariateQMFSet> sets;
  for (const auto& n : split(names, ',')) sets.push_back(family_by_name(n));
  return sets;
}

// ---------------------------------------------------------------------------

struct SmithArgs {
  std::string matrix, target, json_out;
};

int run_smith(const SmithArgs& a) {
  const IntMatrix m = parse_matrix(a.matrix);
  SmithFactorization f = a.target.empty() ? smith_normal_form(m) : smith_with_target(m, parse_ints(a.target));
  const bool ok = verifies(f, m);
  std::cout << "Theta1 (det " << determinant(f.theta1) << "):\n"
            << format_matrix(f.theta1) << "Sigma = diag" << format_ints(f.sigma) << "\n"
            << "Theta2 (det " << determinant(f.theta2) << "):\n"
            << format_matrix(f.theta2) << "reconstruction " << (ok ? "ok" : "FAILED") << "\n";
  json j = to_json(f);
  j["input"] = to_json(m);
  j["verified"] = ok;
  if (!a.json_out.empty()) write_json(a.json_out, j);
  else std::cout << j.dump() << "\n";
  return ok ? kOk : kVerify;
}

struct BankBuildArgs {
  std::string xi, sigma, families, out;
};

int run_bank_build(const BankBuildArgs& a) {
  const IntMatrix xi = parse_matrix(a.xi);
  const auto sets = family_sets(a.families);
  const AnisoFilterBank bank = build_bank(xi, parse_ints(a.sigma), sets);
  write_json(a.out, to_json(bank));
  std::cout << "wrote " << bank.size() << "-filter bank for Xi =\n" << format_matrix(bank.xi);
  return kOk;
}

struct BankVerifyArgs {
  std::string file;
  double qmf_tol = 1e-12;
  double moment_tol = 1e-10;
  int degree = -1;
  Int half_window = 30;
};

int run_bank_verify(const BankVerifyArgs& a) {
  const AnisoFilterBank bank = bank_from_json(read_json(a.file));
  bool ok = true;
  const bool fact_ok = verifies(bank.fact, bank.xi);
  std::cout << "factorization " << (fact_ok ? "ok" : "FAILED") << "\n";
  ok = ok && fact_ok;

  const QMFMatrixReport q = qmf_matrix(bank);
  std::cout << "cross-QMF residuals (|det Xi| = " << bank.det_abs() << "):\n";
  for (std::size_t i = 0; i < bank.size(); ++i) {
    std::cout << "  " << eta_key(bank.etas[i]) << ":";
    for (double v : q.residual[i]) std::printf(" %9.2e", v);
    std::cout << "\n";
  }
  std::printf("max residual %.3e at (%s | %s)\n", q.max_residual, eta_key(bank.etas[q.worst_i]).c_str(),
              eta_key(bank.etas[q.worst_j]).c_str());
  if (q.max_residual > a.qmf_tol) {
    ok = false;
    std::cout << "QMF breach: filters " << eta_key(bank.etas[q.worst_i]) << " and " << eta_key(bank.etas[q.worst_j])
              << " exceed tolerance " << a.qmf_tol << "\n";
  }

  std::cout << "moment orders:";
  int min_high = 1 << 20;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    std::cout << " " << eta_key(bank.etas[k]) << "=" << bank.moments[k];
    if (k > 0) min_high = std::min(min_high, bank.moments[k]);
  }
  std::cout << "\n";

  const int degree = a.degree >= 0 ? a.degree : std::max(0, min_high - 1);
  const int s = bank.dim();
  const Window w(IntVec(s, -a.half_window), IntVec(s, a.half_window));
  const ReproductionReport rep = reproduction_check(bank, degree, w);
  std::printf("reproduction degree %d: max detail %.3e, max relative fit residual %.3e\n", degree, rep.max_detail,
              rep.max_relative_fit_residual);
  if (rep.max_detail > a.moment_tol) {
    ok = false;
    std::cout << "moment breach above tolerance " << a.moment_tol << "\n";
  }
  std::cout << (ok ? "bank verified" : "bank FAILED verification") << "\n";
  return ok ? kOk : kVerify;
}

struct CascadeArgs {
  std::string bank, eta = "all", out;
  int r = 6;
  int pgm = 0;
};

int run_cascade(const CascadeArgs& a) {
  const AnisoFilterBank bank = bank_from_json(read_json(a.bank));
  const GridOptions opt = grid_options();
  std::vector<std::size_t> which;
  if (a.eta == "all") {
    for (std::size_t k = 0; k < bank.size(); ++k) which.push_back(k);
  } else {
    which.push_back(bank.index_of(parse_ints(a.eta)));
  }
  if (a.pgm != 0 && a.pgm != 8 && a.pgm != 16) fail(Errc::parse_error, "--pgm must be 8 or 16");
  for (std::size_t k : which) {
    const SampledFunction f = wavelet_samples(bank, k, a.r, opt);
    std::string stem = "eta";
    for (Int v : bank.etas[k]) stem += "_" + std::to_string(v);
    write_sampled(fs::path(a.out) / stem, f, a.pgm ? std::optional<int>(a.pgm) : std::nullopt);
    std::cout << stem << ": level " << f.level << ", window " << format_ints(f.window().lo) << ".."
              << format_ints(f.window().hi) << "\n";
  }
  return kOk;
}

struct DecomposeArgs {
  std::string config, signal, path, out;
  int depth = -1;
};

int run_decompose(const DecomposeArgs& a) {
  const MMRAConfig cfg = config_from_json(read_json(a.config));
  const CoefSeq signal = read_signal(a.signal);
  DecompositionTree tree;
  if (!a.path.empty() || a.depth == 0) {
    std::vector<int> path;
    if (!a.path.empty())
      for (Int d : parse_ints(a.path)) path.push_back(int(d));
    tree = decompose_path(cfg, signal, path);
  } else {
    tree = decompose(cfg, signal, a.depth > 0 ? a.depth : cfg.depth);
  }
  save_tree(a.out, cfg, tree);
  std::size_t details = 0, approx = 0;
  for (const auto& [p, n] : tree.nodes) details += n.details.size(), approx += n.approx ? 1 : 0;
  std::cout << tree.nodes.size() << " nodes, " << details << " detail arrays, " << approx << " approximations\n";
  return kOk;
}

struct ReconstructArgs {
  std::string tree, out, check;
  double tol = 1e-9;
};

int run_reconstruct(const ReconstructArgs& a) {
  const LoadedTree t = load_tree(a.tree);
  const CoefSeq y = crop(reconstruct(t.config, t.tree), t.tree.signal_window);
  if (!a.out.empty()) write_grid(a.out, y);
  if (a.check.empty()) return kOk;
  const CoefSeq ref = read_signal(a.check);
  const double err = max_abs_diff(y, ref);
  std::printf("max roundtrip error %.3e\n", err);
  if (err > a.tol * std::max(1.0, max_abs(ref))) {
    std::cout << "roundtrip error exceeds tolerance " << a.tol << "\n";
    return kVerify;
  }
  return kOk;
}

struct SlopeArgs {
  Int sigma1 = 3, sigma2 = 2;
  int s = 2;
  std::string signs, w, w2;
  double delta = 0.01;
  bool greedy = false;
};

int run_slope(const SlopeArgs& a) {
  std::vector<int> signs;
  if (!a.signs.empty())
    for (Int v : parse_ints(a.signs)) signs.push_back(int(v));
  const DilationFamily fam = dilation_family(a.sigma1, a.sigma2, a.s, signs);
  const auto w = parse_doubles(a.w);
  const auto w2 = parse_doubles(a.w2);
  const SlopeDigits d = slope_digits(fam, w, w2, a.delta, a.greedy ? SlopeSearch::greedy : SlopeSearch::exact);
  std::cout << "eps = (";
  for (std::size_t i = 0; i < d.eps.size(); ++i) std::cout << (i ? "," : "") << d.eps[i];
  std::printf(")\nn = %d\nerror = %.17g\n", d.n, d.achieved_error);
  const IntMatrix xi = xi_product(fam, d.eps);
  std::cout << "Xi_eps =\n" << format_matrix(xi);
  json j = {{"eps", d.eps}, {"n", d.n}, {"achieved_error", d.achieved_error}, {"w", d.w}, {"w2", d.w2},
            {"xi_eps", to_json(xi)}};
  std::cout << j.dump() << "\n";
  return kOk;
}

struct SignalArgs {
  std::string shape, out;
  std::uint64_t seed = 1;
};

int run_signal(const SignalArgs& a) {
  const IntVec shape = parse_ints(a.shape);
  CoefSeq c(IntVec(shape.size(), 0), shape);
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : c.data()) v = u(rng);
  write_grid(a.out, c);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic QMF filterbanks, limit functions and multiple multiresolution transforms"};
  app.require_subcommand(1);

  SmithArgs smith;
  auto* c_smith = app.add_subcommand("smith", "Smith factorization of an integer matrix");
  c_smith->add_option("matrix", smith.matrix, "Rows separated by ';', entries by ',' (or a JSON file)")->required();
  c_smith->add_option("--target", smith.target, "Requested diagonal, e.g. 3,2");
  c_smith->add_option("--json", smith.json_out, "Write the factorization to this file");

  auto* c_bank = app.add_subcommand("bank", "Build or verify filterbanks");
  c_bank->require_subcommand(1);
  BankBuildArgs build;
  auto* c_build = c_bank->add_subcommand("build", "Build the tensor-product bank for a dilation");
  c_build->add_option("--xi", build.xi, "Dilation matrix, e.g. '3,-1;0,2'")->required();
  c_build->add_option("--sigma", build.sigma, "Target Smith diagonal, e.g. 3,2")->required();
  c_build->add_option("--families", build.families, "Univariate families per axis (haar, db2, cl3)")->required();
  c_build->add_option("-o,--out", build.out, "Output bank JSON")->required();
  BankVerifyArgs verify;
  auto* c_verify = c_bank->add_subcommand("verify", "Check QMF identities, moments and reproduction");
  c_verify->add_option("bank", verify.file, "Bank JSON")->required()->check(CLI::ExistingFile);
  c_verify->add_option("--qmf-tol", verify.qmf_tol, "QMF residual tolerance")->check(CLI::PositiveNumber);
  c_verify->add_option("--moment-tol", verify.moment_tol, "Vanishing moment tolerance")->check(CLI::PositiveNumber);
  c_verify->add_option("--degree", verify.degree, "Polynomial degree to test (default: min order - 1)");
  c_verify->add_option("--half-window", verify.half_window, "Test window [-N, N]^s");

  CascadeArgs cas;
  auto* c_cascade = app.add_subcommand("cascade", "Sample scaling and wavelet functions");
  c_cascade->add_option("bank", cas.bank, "Bank JSON")->required()->check(CLI::ExistingFile);
  c_cascade->add_option("--eta", cas.eta, "Channel, e.g. 1,1, or 'all'");
  c_cascade->add_option("-r,--levels", cas.r, "Subdivision levels")->check(CLI::Range(1, 64));
  c_cascade->add_option("-o,--out", cas.out, "Output directory")->required();
  c_cascade->add_option("--pgm", cas.pgm, "Also write 8 or 16 bit PGM previews");

  auto* c_transform = app.add_subcommand("transform", "Multiple multiresolution transforms");
  c_transform->require_subcommand(1);
  DecomposeArgs dec;
  auto* c_dec = c_transform->add_subcommand("decompose", "Decompose a signal into a tree");
  c_dec->add_option("--config", dec.config, "MMRA config JSON")->required()->check(CLI::ExistingFile);
  c_dec->add_option("--signal", dec.signal, "Binary grid or PGM")->required()->check(CLI::ExistingFile);
  auto* o_depth = c_dec->add_option("--depth", dec.depth, "Full-tree depth (default: config depth)");
  c_dec->add_option("--path", dec.path, "Digit path, e.g. 1,0")->excludes(o_depth);
  c_dec->add_option("-o,--out", dec.out, "Output tree directory")->required();
  ReconstructArgs rec;
  auto* c_rec = c_transform->add_subcommand("reconstruct", "Reconstruct a signal from a tree");
  c_rec->add_option("--tree", rec.tree, "Tree directory")->required()->check(CLI::ExistingDirectory);
  c_rec->add_option("-o,--out", rec.out, "Output binary grid");
  c_rec->add_option("--check", rec.check, "Compare against this signal")->check(CLI::ExistingFile);
  c_rec->add_option("--tol", rec.tol, "Roundtrip tolerance for --check")->check(CLI::PositiveNumber);

  SlopeArgs slope;
  auto* c_slope = app.add_subcommand("slope", "Digits approximating a target slope");
  c_slope->add_option("--sigma1", slope.sigma1, "Larger scale");
  c_slope->add_option("--sigma2", slope.sigma2, "Smaller scale");
  c_slope->add_option("--s", slope.s, "Dimension")->check(CLI::Range(2, 16));
  c_slope->add_option("--signs", slope.signs, "Orthant signs, s-1 entries of 0/1");
  c_slope->add_option("--w", slope.w, "Reference slope, s-1 comma separated values")->required();
  c_slope->add_option("--w2", slope.w2, "Target slope, s-1 comma separated values")->required();
  c_slope->add_option("--delta", slope.delta, "Accuracy")->check(CLI::PositiveNumber);
  c_slope->add_flag("--greedy", slope.greedy, "Use nearest-cell descent instead of the exact search");

  SignalArgs sig;
  auto* c_signal = app.add_subcommand("signal", "Write a uniform random test signal");
  c_signal->add_option("--shape", sig.shape, "Grid shape, e.g. 60,60")->required();
  c_signal->add_option("--seed", sig.seed, "Random seed");
  c_signal->add_option("-o,--out", sig.out, "Output binary grid")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_smith) return run_smith(smith);
    if (*c_build) return run_bank_build(build);
    if (*c_verify) return run_bank_verify(verify);
    if (*c_cascade) return run_cascade(cas);
    if (*c_dec) return run_decompose(dec);
    if (*c_rec) return run_reconstruct(rec);
    if (*c_slope) return run_slope(slope);
    if (*c_signal) return run_signal(sig);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IOError: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
