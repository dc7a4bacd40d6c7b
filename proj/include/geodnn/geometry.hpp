#pragma once

// Manifold-generic geometry on ManifoldPoint: log/exp, distances, tangent
// bases and the Frechet mean.

#include <span>
#include <string>
#include <vector>

#include "geodnn/manifold.hpp"
#include "geodnn/shape.hpp"
#include "geodnn/spd.hpp"
#include "geodnn/sphere.hpp"

namespace geodnn {

inline TangentVector log_map(const ManifoldPoint& base, const ManifoldPoint& x,
                             SpdMetric metric = SpdMetric::affine) {
  require_same_space(base, x);
  if (base.is_vector()) return {sphere::log(base.coords(), x.coords()), {}};
  if (metric == SpdMetric::log_euclidean) {
    // Log-Euclidean tangent vectors are kept in the log domain.
    return {{}, spd::log_matrix(x.matrix()) - spd::log_matrix(base.matrix())};
  }
  return {{}, spd::log_map(base.matrix(), x.matrix())};
}

inline ManifoldPoint exp_map(const ManifoldPoint& base, const TangentVector& v,
                             SpdMetric metric = SpdMetric::affine) {
  switch (base.kind()) {
    case ManifoldKind::sphere: return ManifoldPoint::sphere(sphere::exp(base.coords(), v.vec));
    case ManifoldKind::preshape: return ManifoldPoint::preshape(sphere::exp(base.coords(), v.vec));
    case ManifoldKind::spd:
      if (metric == SpdMetric::log_euclidean)
        return ManifoldPoint::spd(sym_exp(spd::log_matrix(base.matrix()) + symmetrize(v.mat)));
      return ManifoldPoint::spd(spd::exp_map(base.matrix(), v.mat));
  }
  throw Error(ErrorKind::invalid_spec, "unknown manifold");
}

/// Geodesic distance: great-circle angle for sphere and preshape, the SPD
/// metric otherwise.
inline double geodesic_distance(const ManifoldPoint& a, const ManifoldPoint& b,
                                SpdMetric metric = SpdMetric::affine) {
  require_same_space(a, b);
  if (a.is_vector()) return sphere::distance(a.coords(), b.coords());
  return spd::distance(a.matrix(), b.matrix(), metric);
}

/// Orthonormal basis (columns) of the tangent space at a sphere or preshape
/// point: Gram-Schmidt over the ambient standard basis after removing the
/// normal direction (and, for preshapes, the two centering directions).
/// Deterministic ordering; d = intrinsic_dim columns.
inline Matrix tangent_basis(const ManifoldPoint& base) {
  if (!base.is_vector()) throw Error(ErrorKind::invalid_spec, "tangent_basis: SPD charts use whitened coordinates");
  const Vector& x = base.coords();
  const auto n = x.size();
  std::vector<Vector> frame{x};
  if (base.kind() == ManifoldKind::preshape) {
    const Matrix c = shape::centering_directions(static_cast<int>(n / 2));
    frame.push_back(c.col(0));
    frame.push_back(c.col(1));
  }
  const auto fixed = frame.size();
  const int d = base.intrinsic_dim();
  for (Eigen::Index i = 0; i < n && static_cast<int>(frame.size() - fixed) < d; ++i) {
    Vector v = Vector::Unit(n, i);
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& f : frame) v -= f.dot(v) * f;
    const double norm = v.norm();
    if (norm > 1e-6) frame.push_back(v / norm);
  }
  if (static_cast<int>(frame.size() - fixed) != d) throw Error(ErrorKind::numeric, "tangent_basis: could not complete frame");
  Matrix basis(n, d);
  for (int j = 0; j < d; ++j) basis.col(j) = frame[fixed + static_cast<std::size_t>(j)];
  return basis;
}

/// Raised when the Frechet-mean iteration does not settle; carries the last
/// iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ManifoldPoint last)
      : Error(ErrorKind::convergence, what), last_(std::move(last)) {}
  const ManifoldPoint& last_iterate() const { return last_; }

 private:
  ManifoldPoint last_;
};

struct FrechetOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
};

/// Minimizer of the mean squared geodesic distance, by the fixed point
/// x <- exp_x(mean_i log_x(p_i)). Starts from the normalized Euclidean mean
/// (sphere, preshape) or the eigenvalue-clipped arithmetic mean (SPD).
/// Under the log-Euclidean SPD metric the mean exp(mean log P_i) is exact.
inline ManifoldPoint frechet_mean(std::span<const ManifoldPoint> points, SpdMetric metric = SpdMetric::affine,
                                  FrechetOptions opt = {}) {
  if (points.empty()) throw Error(ErrorKind::invalid_spec, "frechet_mean of an empty set");
  const ManifoldPoint& first = points.front();
  for (const auto& p : points) require_same_space(first, p);
  const double inv_n = 1.0 / static_cast<double>(points.size());

  if (first.is_vector()) {
    Vector sum = Vector::Zero(first.ambient_size());
    for (const auto& p : points) sum += p.coords();
    Vector x = sum.norm() > 1e-12 ? Vector(sum / sum.norm()) : first.coords();
    auto make = [&](const Vector& v) {
      return first.kind() == ManifoldKind::sphere ? ManifoldPoint::sphere_normalized(v)
                                                  : shape::preshape(v);
    };
    for (int it = 0; it < opt.max_iterations; ++it) {
      Vector step = Vector::Zero(x.size());
      for (const auto& p : points) step += sphere::log(x, p.coords());
      step *= inv_n;
      x = sphere::exp(x, sphere::project_tangent(x, step));
      if (step.norm() < opt.tolerance) return make(x);
    }
    throw ConvergenceError("frechet_mean did not converge in " + std::to_string(opt.max_iterations) + " iterations",
                           make(x));
  }

  const auto d = first.ambient_size();
  if (metric == SpdMetric::log_euclidean) {
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& p : points) acc += spd::log_matrix(p.matrix());
    return ManifoldPoint::spd(sym_exp(acc * inv_n));
  }
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& p : points) acc += p.matrix();
  const SymEig e0 = sym_eig(acc * inv_n);
  const double floor = kSpdHardFloor * 10.0 * std::abs(e0.values(e0.values.size() - 1));
  Matrix x = e0.apply([floor](double l) { return std::max(l, floor); });
  for (int it = 0; it < opt.max_iterations; ++it) {
    const SymEig e = spd::checked_eig(x, "Frechet iterate");
    const Matrix root = spd_sqrt(e);
    const Matrix inv_root = spd_inv_sqrt(e);
    Matrix white = Matrix::Zero(d, d);
    for (const auto& p : points) white += spd::whitened_log(inv_root, p.matrix());
    white *= inv_n;
    x = symmetrize(root * sym_exp(white) * root);
    if (white.norm() < opt.tolerance) return ManifoldPoint::spd(x);
  }
  throw ConvergenceError("frechet_mean did not converge in " + std::to_string(opt.max_iterations) + " iterations",
                         ManifoldPoint::spd(x));
}

inline ManifoldPoint frechet_mean(const std::vector<ManifoldPoint>& points, SpdMetric metric = SpdMetric::affine,
                                  FrechetOptions opt = {}) {
  return frechet_mean(std::span<const ManifoldPoint>(points), metric, opt);
}

}  // namespace geodnn
