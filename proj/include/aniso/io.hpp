#pragma once

// Serialization: JSON for matrices, filters, banks and configs; a raw binary
// grid format for coefficient arrays; PGM images; tree directories.
//
// Binary grid layout (little endian):
//   "ANI1" | uint32 dim | int64 shape[dim] | int64 origin[dim] | float64 data[...]
// with data row-major, last coordinate fastest.

#include <aniso/dictionary.hpp>
#include <aniso/lattice.hpp>
#include <aniso/mmra.hpp>
#include <aniso/seqcore.hpp>
#include <aniso/subdivision.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace aniso {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files

/// Writes through a temporary file in the same directory, then renames.
inline void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) fail(Errc::io_error, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what = "input") {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, what + ": " + e.what());
  }
}

inline json read_json(const fs::path& path) { return parse_json(read_file(path), path.string()); }

inline void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

namespace detail {

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON encodings

inline json to_json(const IntMatrix& m) { return {{"dim", m.dim()}, {"rows", m.rows()}}; }

inline IntMatrix int_matrix_from_json(const json& j) {
  std::vector<IntVec> rows;
  if (j.is_array()) {
    rows = j.get<std::vector<IntVec>>();
  } else {
    rows = detail::get<std::vector<IntVec>>(j, "rows");
  }
  if (rows.empty()) fail(Errc::parse_error, "empty matrix");
  for (const auto& r : rows)
    if (r.size() != rows.size()) fail(Errc::dim_mismatch, "matrix is not square");
  return IntMatrix::from_rows(rows);
}

inline json to_json(const Rational& q) {
  return {{"num", numerator(q).str()}, {"den", denominator(q).str()}};
}

inline Rational rational_from_json(const json& j) {
  try {
    const BigInt num(j.at("num").get<std::string>()), den(j.at("den").get<std::string>());
    if (den == 0) fail(Errc::parse_error, "rational with zero denominator");
    // Boost 1.74 rejects a negative denominator in the two-argument constructor.
    return Rational(num) / Rational(den);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("rational: ") + e.what());
  } catch (const std::runtime_error& e) {
    fail(Errc::parse_error, std::string("rational: ") + e.what());
  }
}

inline json to_json(const RatMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json r = json::array();
    for (int k = 0; k < m.dim(); ++k) r.push_back(to_json(m(i, k)));
    rows.push_back(r);
  }
  return {{"dim", m.dim()}, {"rows", rows}};
}

inline json to_json(const Window& w) { return {{"lo", w.lo}, {"hi", w.hi}}; }

inline Window window_from_json(const json& j) {
  return {detail::get<IntVec>(j, "lo"), detail::get<IntVec>(j, "hi")};
}

inline json to_json(const CoefSeq& c) {
  return {{"dim", c.dim()},
          {"origin", c.origin()},
          {"shape", c.shape()},
          {"data", std::vector<double>(c.data().begin(), c.data().end())}};
}

inline CoefSeq coefseq_from_json(const json& j) {
  auto origin = detail::get<IntVec>(j, "origin");
  auto shape = detail::get<IntVec>(j, "shape");
  auto data = detail::get<std::vector<double>>(j, "data");
  if (j.contains("dim") && j["dim"].get<std::size_t>() != origin.size()) fail(Errc::dim_mismatch, "coefficient dim");
  return CoefSeq(origin, shape, data);
}

inline json to_json(const SmithFactorization& f) {
  return {{"theta1", to_json(f.theta1)}, {"sigma", f.sigma}, {"theta2", to_json(f.theta2)}};
}

inline SmithFactorization smith_from_json(const json& j) {
  return {int_matrix_from_json(j.at("theta1")), detail::get<IntVec>(j, "sigma"), int_matrix_from_json(j.at("theta2"))};
}

inline json to_json(const UnivariateQMFSet& s) {
  json f = json::array();
  for (const auto& c : s.filters) f.push_back(to_json(c));
  return {{"name", s.name}, {"sigma", s.sigma}, {"filters", f}};
}

inline UnivariateQMFSet qmf_set_from_json(const json& j) {
  UnivariateQMFSet s{detail::get<std::string>(j, "name"), detail::get<Int>(j, "sigma"), {}};
  for (const json& f : j.at("filters")) {
    s.filters.push_back(coefseq_from_json(f));
    if (s.filters.back().dim() != 1) fail(Errc::dim_mismatch, "univariate filters must be 1-D");
  }
  if (s.sigma < 2 || s.filters.size() != std::size_t(s.sigma))
    fail(Errc::scale_mismatch, "a scale-σ set needs exactly σ filters");
  return s;
}

inline std::string eta_key(const IntVec& eta) {
  std::string k;
  for (std::size_t i = 0; i < eta.size(); ++i) k += (i ? "," : "") + std::to_string(eta[i]);
  return k;
}

inline json to_json(const AnisoFilterBank& b) {
  json filters = json::object(), moments = json::object();
  for (std::size_t k = 0; k < b.size(); ++k) {
    filters[eta_key(b.etas[k])] = to_json(b.filters[k]);
    moments[eta_key(b.etas[k])] = b.moments[k];
  }
  return {{"xi", to_json(b.xi)},
          {"sigma", b.fact.sigma},
          {"theta1", to_json(b.fact.theta1)},
          {"theta2", to_json(b.fact.theta2)},
          {"families", b.families},
          {"filters", filters},
          {"moments", moments}};
}

/// Loads the stored filters as they are; moments are recomputed.
inline AnisoFilterBank bank_from_json(const json& j) {
  AnisoFilterBank b;
  try {
    b.xi = int_matrix_from_json(j.at("xi"));
    b.fact = {int_matrix_from_json(j.at("theta1")), j.at("sigma").get<IntVec>(), int_matrix_from_json(j.at("theta2"))};
    if (j.contains("families")) b.families = j["families"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("bank: ") + e.what());
  }
  const int s = b.xi.dim();
  if (int(b.fact.sigma.size()) != s) fail(Errc::dim_mismatch, "bank sigma length");
  IntVec eta(s, 0);
  while (true) {
    const std::string key = eta_key(eta);
    if (!j.at("filters").contains(key)) fail(Errc::parse_error, "bank is missing filter " + key);
    b.etas.push_back(eta);
    b.filters.push_back(coefseq_from_json(j["filters"][key]));
    if (b.filters.back().dim() != s) fail(Errc::dim_mismatch, "filter " + key + " dimension");
    b.moments.push_back(moment_order(b.filters.back()));
    int i = s - 1;
    while (i >= 0 && eta[i] == std::abs(b.fact.sigma[i]) - 1) eta[i] = 0, --i;
    if (i < 0) break;
    ++eta[i];
  }
  return b;
}

// ---------------------------------------------------------------------------
// MMRA configuration files: {sigma1, sigma2, s, signs, families, depth}

inline json to_json(const MMRAConfig& c) {
  return {{"sigma1", c.family.sigma1}, {"sigma2", c.family.sigma2}, {"s", c.family.dim},
          {"signs", c.family.signs},   {"families", c.families},     {"depth", c.depth}};
}

inline MMRAConfig config_from_json(const json& j) {
  const auto s = detail::get<int>(j, "s");
  std::vector<int> signs;
  if (j.contains("signs")) signs = detail::get<std::vector<int>>(j, "signs");
  const int depth = j.contains("depth") ? detail::get<int>(j, "depth") : 1;
  return make_config(detail::get<Int>(j, "sigma1"), detail::get<Int>(j, "sigma2"), s, signs,
                     detail::get<std::vector<std::string>>(j, "families"), depth);
}

// ---------------------------------------------------------------------------
// Binary grids

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(Errc::parse_error, "grid file is truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_grid(const CoefSeq& c) {
  std::string out = "ANI1";
  out.reserve(8 + 16 * std::size_t(c.dim()) + 8 * c.size());
  detail::put_le<std::uint32_t>(out, std::uint32_t(c.dim()));
  for (Int v : c.shape()) detail::put_le<std::int64_t>(out, v);
  for (Int v : c.origin()) detail::put_le<std::int64_t>(out, v);
  for (double v : c.data()) detail::put_le<double>(out, v);
  return out;
}

inline CoefSeq decode_grid(const std::string& in) {
  if (in.size() < 8 || in.compare(0, 4, "ANI1") != 0) fail(Errc::parse_error, "not a binary grid (bad magic)");
  std::size_t pos = 4;
  const auto dim = detail::get_le<std::uint32_t>(in, pos);
  if (dim == 0 || dim > 16) fail(Errc::parse_error, "implausible grid dimension");
  IntVec shape(dim), origin(dim);
  std::size_t n = 1;
  for (auto& v : shape) {
    v = detail::get_le<std::int64_t>(in, pos);
    if (v < 1) fail(Errc::parse_error, "grid shape must be positive");
    n *= std::size_t(v);
  }
  for (auto& v : origin) v = detail::get_le<std::int64_t>(in, pos);
  if (in.size() - pos != 8 * n) fail(Errc::parse_error, "grid payload size does not match shape");
  std::vector<double> data(n);
  for (auto& v : data) v = detail::get_le<double>(in, pos);
  return CoefSeq(origin, shape, std::move(data));
}

inline void write_grid(const fs::path& path, const CoefSeq& c) { write_file_atomic(path, encode_grid(c)); }
inline CoefSeq read_grid(const fs::path& path) { return decode_grid(read_file(path)); }

// ---------------------------------------------------------------------------
// PGM images; pixel (row, col) is the sample at α = (row, col)

inline CoefSeq decode_pgm(const std::string& in) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < in.size()) {
      if (std::isspace(static_cast<unsigned char>(in[pos]))) {
        ++pos;
      } else if (in[pos] == '#') {
        while (pos < in.size() && in[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < in.size() && !std::isspace(static_cast<unsigned char>(in[pos]))) ++pos;
    if (start == pos) fail(Errc::parse_error, "truncated PGM header");
    return in.substr(start, pos - start);
  };
  if (token() != "P5") fail(Errc::parse_error, "only binary PGM (P5) is supported");
  long width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(token());
    height = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::logic_error&) {
    fail(Errc::parse_error, "malformed PGM header");
  }
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) fail(Errc::parse_error, "invalid PGM header values");
  ++pos;  // single whitespace before the raster
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t n = std::size_t(width) * std::size_t(height);
  if (in.size() < pos + n * bpp) fail(Errc::parse_error, "PGM raster is truncated");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = static_cast<unsigned char>(in[pos + i * bpp]);
    if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(in[pos + i * bpp + 1]);
    data[i] = double(v) / double(maxval);
  }
  return CoefSeq({0, 0}, {height, width}, std::move(data));
}

inline CoefSeq read_pgm(const fs::path& path) { return decode_pgm(read_file(path)); }

/// Affine map used for PGM export: pixel = round((value − offset) / scale).
struct PgmScaling {
  double offset = 0;
  double scale = 1;
  int bits = 8;
};

inline PgmScaling write_pgm(const fs::path& path, const CoefSeq& c, int bits = 8) {
  if (c.dim() != 2) fail(Errc::dim_mismatch, "PGM export needs a 2-D grid");
  if (bits != 8 && bits != 16) fail(Errc::bad_index, "PGM depth must be 8 or 16");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  double lo = c.data()[0], hi = c.data()[0];
  for (double v : c.data()) lo = std::min(lo, v), hi = std::max(hi, v);
  PgmScaling sc{lo, hi > lo ? (hi - lo) / maxval : 1.0, bits};
  std::string out = "P5\n" + std::to_string(c.shape()[1]) + " " + std::to_string(c.shape()[0]) + "\n" +
                    std::to_string(maxval) + "\n";
  for (double v : c.data()) {
    const auto p = unsigned(std::clamp(std::lround((v - sc.offset) / sc.scale), 0L, long(maxval)));
    if (bits == 16) out.push_back(char(p >> 8));
    out.push_back(char(p & 0xff));
  }
  write_file_atomic(path, out);
  return sc;
}

/// Binary grid or PGM, chosen by file contents.
inline CoefSeq read_signal(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.compare(0, 4, "ANI1") == 0) return decode_grid(bytes);
  if (bytes.compare(0, 2, "P5") == 0) return decode_pgm(bytes);
  fail(Errc::parse_error, path.string() + " is neither a binary grid nor a PGM image");
}

// ---------------------------------------------------------------------------
// Sampled functions: grid + JSON sidecar

inline json sidecar(const SampledFunction& f) {
  return {{"level", f.level}, {"xi_total", to_json(f.xi_total)}, {"window", to_json(f.window())}};
}

inline void write_sampled(const fs::path& stem, const SampledFunction& f, std::optional<int> pgm_bits = {}) {
  json side = sidecar(f);
  fs::path grid = stem, meta = stem;
  grid += ".grid";
  meta += ".json";
  write_grid(grid, f.values);
  if (pgm_bits && f.values.dim() == 2) {
    fs::path pgm = stem;
    pgm += ".pgm";
    const PgmScaling sc = write_pgm(pgm, f.values, *pgm_bits);
    side["pgm"] = {{"offset", sc.offset}, {"scale", sc.scale}, {"bits", sc.bits}};
  }
  write_json(meta, side);
}

inline SampledFunction read_sampled(const fs::path& stem) {
  fs::path grid = stem, meta = stem;
  grid += ".grid";
  meta += ".json";
  const json side = read_json(meta);
  SampledFunction f{detail::get<int>(side, "level"), int_matrix_from_json(side.at("xi_total")), read_grid(grid)};
  if (!(window_from_json(side.at("window")) == f.window())) fail(Errc::grid_mismatch, "sidecar window differs from grid");
  return f;
}

// ---------------------------------------------------------------------------
// Decomposition trees on disk: manifest.json + one grid per (path, channel)

/// File stem for a node: "root" or "n" followed by the digits joined with '_'.
inline std::string node_stem(const DigitPath& p) {
  if (p.empty()) return "root";
  std::string s = "n";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "_" : "") + std::to_string(p[i]);
  return s;
}

inline void save_tree(const fs::path& dir, const MMRAConfig& cfg, const DecompositionTree& tree) {
  fs::create_directories(dir);
  json nodes = json::array();
  for (const auto& [path, node] : tree.nodes) {
    const std::string stem = node_stem(path);
    json jn = {{"path", path},
               {"window", to_json(node.window)},
               {"xi_product", to_json(node.xi_product)},
               {"coefficient_scale", node.coefficient_scale}};
    if (node.core) jn["core"] = to_json(*node.core);
    json det = json::object();
    for (const auto& [k, c] : node.details) {
      const std::string file = stem + "_eta" + std::to_string(k) + ".grid";
      write_grid(dir / file, c);
      det[std::to_string(k)] = file;
    }
    jn["details"] = det;
    if (node.approx) {
      const std::string file = stem + "_approx.grid";
      write_grid(dir / file, *node.approx);
      jn["approx"] = file;
    }
    nodes.push_back(jn);
  }
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << tree.config_hash;
  json manifest = {{"config", to_json(cfg)},
                   {"config_hash", hash.str()},
                   {"mode", tree.mode == TreeMode::full ? "full" : "path"},
                   {"depth", tree.depth},
                   {"path", tree.path},
                   {"signal_window", to_json(tree.signal_window)},
                   {"nodes", nodes}};
  write_json(dir / "manifest.json", manifest);
}

struct LoadedTree {
  MMRAConfig config;
  DecompositionTree tree;
};

inline LoadedTree load_tree(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  LoadedTree out{config_from_json(m.at("config")), {}};
  DecompositionTree& t = out.tree;
  const std::string mode = detail::get<std::string>(m, "mode");
  if (mode != "full" && mode != "path") fail(Errc::parse_error, "unknown tree mode " + mode);
  t.mode = mode == "full" ? TreeMode::full : TreeMode::path;
  t.depth = detail::get<int>(m, "depth");
  t.path = detail::get<DigitPath>(m, "path");
  t.signal_window = window_from_json(m.at("signal_window"));
  t.config_hash = std::stoull(detail::get<std::string>(m, "config_hash"), nullptr, 16);
  for (const json& jn : m.at("nodes")) {
    TreeNode node;
    node.path = detail::get<DigitPath>(jn, "path");
    node.window = window_from_json(jn.at("window"));
    node.xi_product = int_matrix_from_json(jn.at("xi_product"));
    node.coefficient_scale = detail::get<double>(jn, "coefficient_scale");
    if (jn.contains("core")) node.core = window_from_json(jn["core"]);
    for (const auto& [k, file] : jn.at("details").items())
      node.details.emplace(std::stoul(k), read_grid(dir / file.get<std::string>()));
    if (jn.contains("approx")) node.approx = read_grid(dir / jn["approx"].get<std::string>());
    t.nodes.emplace(node.path, std::move(node));
  }
  return out;
}

}  // namespace aniso
