#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geodnn {

enum class ErrorKind {
  invalid_spec,
  shape,
  numeric,
  geometry,
  cut_locus,
  not_positive_definite,
  coverage_gap,
  convergence,
  degenerate_shape,
  training_diverged,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::shape: return "shape";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::cut_locus: return "cut-locus";
    case ErrorKind::not_positive_definite: return "not-positive-definite";
    case ErrorKind::coverage_gap: return "coverage-gap";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::degenerate_shape: return "degenerate-shape";
    case ErrorKind::training_diverged: return "training-diverged";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library. The kind lets
/// callers (the CLI in particular) map failures to exit codes without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures rooted in the manifold geometry (off-manifold points,
  /// cut loci, uncovered points, non-SPD matrices, degenerate shapes).
  bool is_geometric() const noexcept {
    switch (kind_) {
      case ErrorKind::geometry:
      case ErrorKind::cut_locus:
      case ErrorKind::not_positive_definite:
      case ErrorKind::coverage_gap:
      case ErrorKind::degenerate_shape:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

/// Re-raise `e` with a prefix naming where it happened, keeping its kind.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  std::string msg = e.what();
  // Strip the "<kind> error: " prefix added by the constructor.
  const auto pos = msg.find(" error: ");
  if (pos != std::string::npos) msg = msg.substr(pos + 8);
  throw Error(e.kind(), context + ": " + msg);
}

}  // namespace geodnn
