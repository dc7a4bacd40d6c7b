#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geodnn/error.hpp"

namespace geodnn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigen-decomposition A = U diag(values) U^T of a symmetric matrix,
/// eigenvalues ascending.
struct SymEig {
  Vector values;
  Matrix vectors;

  template <class F>
  Matrix apply(F&& f) const {
    Vector fv = values.unaryExpr(f);
    return vectors * fv.asDiagonal() * vectors.transpose();
  }
};

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

inline SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::shape, "eigendecomposition needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numeric, "symmetric eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Relative floor below which an eigenvalue counts as non-positive.
inline constexpr double kSpdHardFloor = 1e-12;

/// Throws not-positive-definite unless every eigenvalue exceeds
/// kSpdHardFloor * ||P||_2.
inline void require_spd(const SymEig& e, const std::string& what = "matrix") {
  const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
  if (!(e.values(0) > kSpdHardFloor * scale) || !std::isfinite(scale)) {
    throw Error(ErrorKind::not_positive_definite,
                what + " has eigenvalue " + std::to_string(e.values(0)) + " (largest " +
                    std::to_string(scale) + ")");
  }
}

/// Eigenvalues clamped at kSpdHardFloor * ||P|| before a log, so numerically
/// semi-definite round-off never produces -inf.
inline Vector clamped_eigenvalues(const SymEig& e) {
  const double floor = kSpdHardFloor * std::abs(e.values(e.values.size() - 1));
  return e.values.cwiseMax(floor);
}

inline Matrix spd_log_matrix(const SymEig& e) {
  Vector lv = clamped_eigenvalues(e).array().log().matrix();
  return e.vectors * lv.asDiagonal() * e.vectors.transpose();
}

inline Matrix sym_exp(const Matrix& s) {
  return sym_eig(s).apply([](double x) { return std::exp(x); });
}

inline Matrix spd_sqrt(const SymEig& e) {
  return e.apply([](double x) { return std::sqrt(std::max(x, 0.0)); });
}

inline Matrix spd_inv_sqrt(const SymEig& e) {
  return e.apply([](double x) { return 1.0 / std::sqrt(x); });
}

inline int sym_feature_count(int d) { return d * (d + 1) / 2; }

/// Isometric vectorization of a symmetric matrix: the d diagonal entries,
/// then sqrt(2) * S(i, j) for i < j in row-major order. The Euclidean norm of
/// the result equals ||S||_F.
inline Vector vec_sym(const Matrix& s) {
  const auto d = s.rows();
  Vector out(sym_feature_count(static_cast<int>(d)));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) out(k++) = s(i, i);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) out(k++) = std::numbers::sqrt2 * s(i, j);
  return out;
}

inline Matrix unvec_sym(const Vector& v, int d) {
  if (v.size() != sym_feature_count(d)) throw Error(ErrorKind::shape, "unvec_sym: length mismatch");
  Matrix s(d, d);
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i) s(i, i) = v(k++);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) s(i, j) = s(j, i) = v(k++) / std::numbers::sqrt2;
  return s;
}

/// Pulls a gradient on vec_sym(S) back to a symmetric matrix G with
/// <G, dS>_F equal to <g, d vec_sym(S)> for every symmetric dS.
inline Matrix vec_sym_backward(const Vector& g, int d) { return unvec_sym(g, d); }

/// Below this eigenvalue gap the divided difference is replaced by f' at the
/// midpoint.
inline constexpr double kEigenGapTolerance = 1e-10;

/// Backward pass of the spectral map P = U diag(l) U^T -> U diag(f(l)) U^T.
/// Given the symmetric upstream gradient dL/dF returns dL/dP as
/// U (K o (U^T G U)) U^T, with K(i,j) the divided difference of f and
/// K(i,i) = f'(l_i).
template <class F, class DF>
Matrix spectral_backward(const SymEig& e, const Matrix& upstream, F&& f, DF&& df) {
  const auto n = e.values.size();
  const Matrix inner = e.vectors.transpose() * symmetrize(upstream) * e.vectors;
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = e.values(i);
    k(i, i) = df(li);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double lj = e.values(j);
      const double gap = li - lj;
      const double kij = std::abs(gap) < kEigenGapTolerance ? df(0.5 * (li + lj)) : (f(li) - f(lj)) / gap;
      k(i, j) = k(j, i) = kij;
    }
  }
  return e.vectors * k.cwiseProduct(inner) * e.vectors.transpose();
}

/// Orthonormal Q from the thin QR of a tall matrix, with columns signed so
/// diag(R) > 0. Throws on rank deficiency.
inline Matrix qr_orthonormal(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double rjj = r(j, j);
    if (!(std::abs(rjj) > 1e-12 * std::max(scale, 1e-300)))
      throw Error(ErrorKind::numeric, "QR retraction: rank-deficient matrix (column " + std::to_string(j) + ")");
    if (rjj < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace geodnn
