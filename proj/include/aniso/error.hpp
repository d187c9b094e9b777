#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aniso {

enum class Errc {
  singular_matrix,
  inconclusive,
  incompatible_diagonal,
  bad_scales,
  not_unimodular,
  dim_mismatch,
  scale_mismatch,
  window_too_small,
  grid_too_large,
  bad_index,
  bad_digit,
  grid_mismatch,
  inconsistent_tree,
  incomplete_tree,
  depth_zero,
  out_of_simplex,
  non_termination,
  overflow,
  parse_error,
  io_error,
};

constexpr const char* to_string(Errc e) noexcept {
  switch (e) {
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::inconclusive: return "Inconclusive";
    case Errc::incompatible_diagonal: return "IncompatibleDiagonal";
    case Errc::bad_scales: return "BadScales";
    case Errc::not_unimodular: return "NotUnimodular";
    case Errc::dim_mismatch: return "DimMismatch";
    case Errc::scale_mismatch: return "ScaleMismatch";
    case Errc::window_too_small: return "WindowTooSmall";
    case Errc::grid_too_large: return "GridTooLarge";
    case Errc::bad_index: return "BadIndex";
    case Errc::bad_digit: return "BadDigit";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::inconsistent_tree: return "InconsistentTree";
    case Errc::incomplete_tree: return "IncompleteTree";
    case Errc::depth_zero: return "DepthZero";
    case Errc::out_of_simplex: return "OutOfSimplex";
    case Errc::non_termination: return "NonTermination";
    case Errc::overflow: return "Overflow";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

using Int = std::int64_t;

inline Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) fail(Errc::overflow, "integer addition");
  return r;
}

inline Int checked_sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) fail(Errc::overflow, "integer subtraction");
  return r;
}

inline Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) fail(Errc::overflow, "integer multiplication");
  return r;
}

}  // namespace aniso
