#pragma once

#include <cmath>
#include <string>

#include "geodnn/error.hpp"
#include "geodnn/linalg.hpp"

namespace geodnn {

enum class ManifoldKind { sphere, preshape, spd };

/// Riemannian metric used for SPD log/exp maps and distances.
enum class SpdMetric { affine, log_euclidean };

inline std::string to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::preshape: return "preshape";
    case ManifoldKind::spd: return "spd";
  }
  return "unknown";
}

inline constexpr double kUnitTolerance = 1e-10;
inline constexpr double kTangentTolerance = 1e-9;

/// A validated point on one of the supported manifolds, held in ambient
/// coordinates:
///  - sphere-d:   unit vector in R^{d+1}
///  - preshape-k: centered unit vector (x1, y1, ..., xk, yk) in R^{2k}
///  - spd-d:      symmetric positive definite d x d matrix
class ManifoldPoint {
 public:
  static ManifoldPoint sphere(Vector x) {
    if (x.size() < 2) throw Error(ErrorKind::geometry, "sphere point needs at least 2 coordinates");
    const double n = x.norm();
    if (!(std::abs(n - 1.0) <= kUnitTolerance))
      throw Error(ErrorKind::geometry, "sphere point has norm " + std::to_string(n));
    return ManifoldPoint(ManifoldKind::sphere, std::move(x), {});
  }

  /// Normalizes x (nonzero) onto the unit sphere.
  static ManifoldPoint sphere_normalized(const Vector& x) {
    const double n = x.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::geometry, "cannot normalize a zero vector");
    return sphere(x / n);
  }

  static ManifoldPoint preshape(Vector z) {
    if (z.size() < 6 || z.size() % 2 != 0)
      throw Error(ErrorKind::geometry, "preshape needs 2k coordinates with k >= 3");
    double cx = 0, cy = 0;
    for (Eigen::Index i = 0; i < z.size(); i += 2) {
      cx += z(i);
      cy += z(i + 1);
    }
    const double k = static_cast<double>(z.size() / 2);
    if (std::abs(cx / k) > kUnitTolerance || std::abs(cy / k) > kUnitTolerance)
      throw Error(ErrorKind::geometry, "preshape centroid is not zero");
    if (!(std::abs(z.norm() - 1.0) <= kUnitTolerance))
      throw Error(ErrorKind::geometry, "preshape has norm " + std::to_string(z.norm()));
    return ManifoldPoint(ManifoldKind::preshape, std::move(z), {});
  }

  static ManifoldPoint spd(const Matrix& p) {
    if (p.rows() != p.cols() || p.rows() < 1) throw Error(ErrorKind::shape, "SPD point must be a square matrix");
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    if (!is_symmetric(p, kUnitTolerance * scale)) throw Error(ErrorKind::not_positive_definite, "matrix is not symmetric");
    Matrix s = symmetrize(p);
    require_spd(sym_eig(s));
    return ManifoldPoint(ManifoldKind::spd, {}, std::move(s));
  }

  ManifoldKind kind() const { return kind_; }
  bool is_vector() const { return kind_ != ManifoldKind::spd; }

  /// Ambient coordinates; sphere and preshape only.
  const Vector& coords() const {
    if (!is_vector()) throw Error(ErrorKind::invalid_spec, "SPD point has no vector coordinates");
    return coords_;
  }
  /// The matrix; SPD only.
  const Matrix& matrix() const {
    if (is_vector()) throw Error(ErrorKind::invalid_spec, "point is not an SPD matrix");
    return matrix_;
  }

  /// Length of the ambient vector, or the matrix size for SPD.
  int ambient_size() const { return static_cast<int>(is_vector() ? coords_.size() : matrix_.rows()); }

  int intrinsic_dim() const {
    const int n = ambient_size();
    switch (kind_) {
      case ManifoldKind::sphere: return n - 1;
      case ManifoldKind::preshape: return n - 3;
      case ManifoldKind::spd: return sym_feature_count(n);
    }
    return 0;
  }

  /// "sphere-2", "preshape-50", "spd-20".
  std::string tag() const {
    const int n = ambient_size();
    switch (kind_) {
      case ManifoldKind::sphere: return "sphere-" + std::to_string(n - 1);
      case ManifoldKind::preshape: return "preshape-" + std::to_string(n / 2);
      case ManifoldKind::spd: return "spd-" + std::to_string(n);
    }
    return "unknown";
  }

  bool same_space(const ManifoldPoint& o) const { return kind_ == o.kind_ && ambient_size() == o.ambient_size(); }

  /// Ambient (chord / Frobenius) distance.
  double chord_distance(const ManifoldPoint& o) const {
    return is_vector() ? (coords_ - o.coords_).norm() : (matrix_ - o.matrix_).norm();
  }

  /// Short human-readable rendering for error messages.
  std::string describe(int max_entries = 6) const {
    std::string s = tag() + " [";
    const double* data = is_vector() ? coords_.data() : matrix_.data();
    const auto n = is_vector() ? coords_.size() : matrix_.size();
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, max_entries); ++i) {
      if (i) s += ", ";
      s += std::to_string(data[i]);
    }
    if (n > max_entries) s += ", ...";
    return s + "]";
  }

 private:
  ManifoldPoint(ManifoldKind k, Vector c, Matrix m) : kind_(k), coords_(std::move(c)), matrix_(std::move(m)) {}

  ManifoldKind kind_;
  Vector coords_;
  Matrix matrix_;
};

/// Tangent vector in ambient representation: a vector orthogonal to the
/// base for sphere/preshape, a symmetric matrix for SPD.
struct TangentVector {
  Vector vec;
  Matrix mat;
};

inline void require_same_space(const ManifoldPoint& a, const ManifoldPoint& b) {
  if (!a.same_space(b)) throw Error(ErrorKind::geometry, "points live on different manifolds: " + a.tag() + " vs " + b.tag());
}

}  // namespace geodnn
