#pragma once

// Symmetric positive definite matrices: affine-invariant exp/log maps,
// affine and log-Euclidean distances, and the matrix-log embedding.

#include <cmath>

#include "geodnn/manifold.hpp"

namespace geodnn::spd {

/// Eigendecomposition of an SPD argument, raising not-positive-definite on
/// failure.
inline SymEig checked_eig(const Matrix& p, const char* what = "matrix") {
  if (p.rows() != p.cols()) throw Error(ErrorKind::shape, std::string(what) + " is not square");
  SymEig e = sym_eig(p);
  require_spd(e, what);
  return e;
}

/// Matrix logarithm U log(S) U^T of an SPD matrix.
inline Matrix log_matrix(const Matrix& p) { return spd_log_matrix(checked_eig(p)); }

/// Exp_{P0}(S) = P0^{1/2} exp(P0^{-1/2} S P0^{-1/2}) P0^{1/2}.
inline Matrix exp_map(const Matrix& p0, const Matrix& s) {
  if (s.rows() != p0.rows() || s.cols() != p0.cols()) throw Error(ErrorKind::shape, "SPD exp: size mismatch");
  const SymEig e = checked_eig(p0, "base point");
  const Matrix root = spd_sqrt(e);
  const Matrix inv_root = spd_inv_sqrt(e);
  return symmetrize(root * sym_exp(symmetrize(inv_root * symmetrize(s) * inv_root)) * root);
}

/// Log_{P0}(P) = P0^{1/2} log(P0^{-1/2} P P0^{-1/2}) P0^{1/2}.
inline Matrix log_map(const Matrix& p0, const Matrix& p) {
  if (p.rows() != p0.rows() || p.cols() != p0.cols()) throw Error(ErrorKind::shape, "SPD log: size mismatch");
  const SymEig e = checked_eig(p0, "base point");
  checked_eig(p, "argument");
  const Matrix root = spd_sqrt(e);
  const Matrix inv_root = spd_inv_sqrt(e);
  return symmetrize(root * spd_log_matrix(sym_eig(symmetrize(inv_root * p * inv_root))) * root);
}

/// Whitened log: log(P0^{-1/2} P P0^{-1/2}). Its vec_sym coordinates are
/// orthonormal coordinates of Log_{P0}(P) for the affine-invariant inner
/// product tr(P0^{-1} A P0^{-1} B).
inline Matrix whitened_log(const Matrix& inv_root_p0, const Matrix& p) {
  return spd_log_matrix(sym_eig(symmetrize(inv_root_p0 * p * inv_root_p0)));
}

/// Affine: (1/2) ||log(P1^{-1/2} P2 P1^{-1/2})||_F.
/// Log-Euclidean: ||log P1 - log P2||_F.
inline double distance(const Matrix& p1, const Matrix& p2, SpdMetric metric = SpdMetric::affine) {
  if (p1.rows() != p2.rows() || p1.cols() != p2.cols()) throw Error(ErrorKind::shape, "SPD distance: size mismatch");
  if (metric == SpdMetric::log_euclidean) return (log_matrix(p1) - log_matrix(p2)).norm();
  const Matrix inv_root = spd_inv_sqrt(checked_eig(p1, "first argument"));
  const SymEig e = checked_eig(symmetrize(inv_root * p2 * inv_root), "whitened second argument");
  return 0.5 * clamped_eigenvalues(e).array().log().matrix().norm();
}

/// vec_sym(log P): diagonal then sqrt(2)-scaled upper triangle, so the
/// feature norm equals ||log P||_F.
inline Vector embed(const Matrix& p) { return vec_sym(log_matrix(p)); }

inline Vector embed(const ManifoldPoint& p) { return embed(p.matrix()); }

}  // namespace geodnn::spd
