#pragma once

// Planar landmark shapes: preshapes and the Veronese-Whitney embedding.
//
// Landmark vectors interleave coordinates as (x1, y1, x2, y2, ..., xk, yk);
// viewed as a complex k-vector, landmark j is x_j + i y_j.

#include <array>
#include <cmath>
#include <vector>

#include "geodnn/manifold.hpp"

namespace geodnn::shape {

using Landmarks = std::vector<std::array<double, 2>>;

inline Vector interleave(const Landmarks& z) {
  Vector v(static_cast<Eigen::Index>(2 * z.size()));
  for (std::size_t j = 0; j < z.size(); ++j) {
    v(static_cast<Eigen::Index>(2 * j)) = z[j][0];
    v(static_cast<Eigen::Index>(2 * j + 1)) = z[j][1];
  }
  return v;
}

/// Removes translation and scale: subtract the centroid, divide by the
/// Frobenius norm.
inline ManifoldPoint preshape(const Vector& xy) {
  if (xy.size() % 2 != 0) throw Error(ErrorKind::shape, "landmark vector must have even length");
  const Eigen::Index k = xy.size() / 2;
  if (k < 3) throw Error(ErrorKind::degenerate_shape, "need at least 3 landmarks, got " + std::to_string(k));
  double cx = 0, cy = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cx += xy(2 * j);
    cy += xy(2 * j + 1);
  }
  cx /= static_cast<double>(k);
  cy /= static_cast<double>(k);
  Vector z(xy.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    z(2 * j) = xy(2 * j) - cx;
    z(2 * j + 1) = xy(2 * j + 1) - cy;
  }
  const double n = z.norm();
  const double scale = xy.cwiseAbs().maxCoeff();
  if (!(n > 1e-12 * std::max(scale, 1e-300)) || !std::isfinite(n))
    throw Error(ErrorKind::degenerate_shape, "all landmarks coincide");
  z /= n;
  // Centering again after scaling removes the O(eps) centroid drift.
  double dx = 0, dy = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    dx += z(2 * j);
    dy += z(2 * j + 1);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    z(2 * j) -= dx / static_cast<double>(k);
    z(2 * j + 1) -= dy / static_cast<double>(k);
  }
  return ManifoldPoint::preshape(z / z.norm());
}

inline ManifoldPoint preshape(const Landmarks& z) { return preshape(interleave(z)); }

inline int vw_feature_count(int k) { return k * k; }

/// Veronese-Whitney features of u u^* for a complex k-vector u given in
/// interleaved form. Ordering: the k diagonal entries |u_j|^2, then Re(u_j
/// conj(u_l)) for j < l (row-major), then Im(u_j conj(u_l)) for j < l.
/// Multiplying u by a unit complex number leaves the features unchanged.
inline Vector vw_embed(const Vector& u) {
  if (u.size() % 2 != 0) throw Error(ErrorKind::shape, "vw_embed: interleaved vector must have even length");
  const Eigen::Index k = u.size() / 2;
  Vector f(k * k);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < k; ++j) f(pos++) = u(2 * j) * u(2 * j) + u(2 * j + 1) * u(2 * j + 1);
  const Eigen::Index im_offset = k * (k - 1) / 2;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double aj = u(2 * j), bj = u(2 * j + 1);
    for (Eigen::Index l = j + 1; l < k; ++l) {
      const double al = u(2 * l), bl = u(2 * l + 1);
      // (aj + i bj)(al - i bl)
      f(pos) = aj * al + bj * bl;
      f(pos + im_offset) = bj * al - aj * bl;
      ++pos;
    }
  }
  return f;
}

inline Vector vw_embed(const ManifoldPoint& u) {
  if (u.kind() != ManifoldKind::preshape) throw Error(ErrorKind::invalid_spec, "vw_embed needs a preshape point");
  return vw_embed(u.coords());
}

/// Rebuilds the Hermitian matrix u u^* from its features, as a 2k x 2k real
/// matrix [[Re, -Im], [Im, Re]].
inline Matrix vw_hermitian_realified(const Vector& f, int k) {
  Matrix re = Matrix::Zero(k, k), im = Matrix::Zero(k, k);
  Eigen::Index pos = 0;
  for (int j = 0; j < k; ++j) re(j, j) = f(pos++);
  const Eigen::Index im_offset = k * (k - 1) / 2;
  for (int j = 0; j < k; ++j)
    for (int l = j + 1; l < k; ++l) {
      re(j, l) = re(l, j) = f(pos);
      im(j, l) = f(pos + im_offset);
      im(l, j) = -f(pos + im_offset);
      ++pos;
    }
  Matrix out(2 * k, 2 * k);
  out << re, -im, im, re;
  return out;
}

/// Applies the similarity z -> scale * R(angle) z + shift to every landmark.
inline Vector similarity(const Vector& xy, double angle, double scale, double shift_x, double shift_y) {
  const double c = std::cos(angle), s = std::sin(angle);
  Vector out(xy.size());
  for (Eigen::Index j = 0; j < xy.size() / 2; ++j) {
    const double x = xy(2 * j), y = xy(2 * j + 1);
    out(2 * j) = scale * (c * x - s * y) + shift_x;
    out(2 * j + 1) = scale * (s * x + c * y) + shift_y;
  }
  return out;
}

/// Orthonormal basis (as columns) of the centering directions in R^{2k}.
inline Matrix centering_directions(int k) {
  Matrix c = Matrix::Zero(2 * k, 2);
  for (int j = 0; j < k; ++j) {
    c(2 * j, 0) = 1.0;
    c(2 * j + 1, 1) = 1.0;
  }
  return c / std::sqrt(static_cast<double>(k));
}

}  // namespace geodnn::shape
