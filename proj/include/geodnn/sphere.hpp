#pragma once

// Closed-form great-circle geometry on the unit sphere. The same maps serve
// the preshape sphere through its ambient R^{2k} representation.

#include <cmath>
#include <numbers>

#include "geodnn/manifold.hpp"

namespace geodnn::sphere {

/// 1 + <p, q> below this is treated as antipodal.
inline constexpr double kAntipodalTolerance = 1e-8;

inline void require_tangent(const Vector& p, const Vector& v) {
  if (p.size() != v.size()) throw Error(ErrorKind::shape, "tangent vector length does not match base point");
  const double inner = p.dot(v);
  if (std::abs(inner) > kTangentTolerance * std::max(1.0, v.norm()))
    throw Error(ErrorKind::geometry, "vector is not tangent at base point (<v, p> = " + std::to_string(inner) + ")");
}

/// cos(|v|) p + sin(|v|) v / |v|, renormalized.
inline Vector exp(const Vector& p, const Vector& v) {
  require_tangent(p, v);
  const double t = v.norm();
  if (t == 0.0) return p;
  Vector q = std::cos(t) * p + (std::sin(t) / t) * v;
  return q / q.norm();
}

/// Inverse of exp inside the injectivity radius; the result has length equal
/// to the geodesic distance.
inline Vector log(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw Error(ErrorKind::shape, "sphere log: dimension mismatch");
  const double c = p.dot(q);
  if (1.0 + c < kAntipodalTolerance) throw Error(ErrorKind::cut_locus, "sphere log: points are antipodal");
  Vector u = q - c * p;
  const double s = u.norm();
  if (s == 0.0) return Vector::Zero(p.size());
  const double theta = std::atan2(s, c);
  return (theta / s) * u;
}

inline double distance(const Vector& p, const Vector& q) {
  return 2.0 * std::atan2((p - q).norm(), (p + q).norm());
}

inline Vector project_tangent(const Vector& p, const Vector& v) { return v - p.dot(v) * p; }

}  // namespace geodnn::sphere
