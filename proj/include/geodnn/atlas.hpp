#pragma once

// Chart atlases, normal coordinates and the bump-function partition of unity.

#include <cmath>
#include <string>
#include <vector>

#include "geodnn/geometry.hpp"

namespace geodnn {

/// One chart: base point x_k, an orthonormal tangent basis (columns; empty
/// for SPD, whose coordinates are the whitened log), and a bump of chord
/// radius r.
struct Chart {
  int index = 0;
  ManifoldPoint base;
  Matrix basis;
  double radius = 1.9;
  double sharpness = 1.0;
  SpdMetric metric = SpdMetric::affine;

  /// Cached P0^{-1/2} for SPD charts.
  Matrix inv_root;
  Matrix log_base;

  int dim() const { return base.intrinsic_dim(); }
};

inline Chart make_chart(const ManifoldPoint& base, double radius = 1.9, int index = 0,
                        SpdMetric metric = SpdMetric::affine, double sharpness = 1.0) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_spec, "chart radius must be positive");
  if (!(sharpness > 0.0)) throw Error(ErrorKind::invalid_spec, "bump sharpness must be positive");
  Chart c{index, base, {}, radius, sharpness, metric, {}, {}};
  if (base.is_vector()) {
    c.basis = tangent_basis(base);
  } else {
    const SymEig e = spd::checked_eig(base.matrix(), "chart base");
    c.inv_root = spd_inv_sqrt(e);
    c.log_base = spd_log_matrix(e);
  }
  return c;
}

/// <log_{x_k} x, v_kj> for each basis vector. For SPD under the affine metric
/// this is vec_sym(log(P0^{-1/2} P P0^{-1/2})); under log-Euclidean,
/// vec_sym(log P - log P0).
inline Vector normal_coords(const Chart& chart, const ManifoldPoint& x) {
  require_same_space(chart.base, x);
  if (x.is_vector()) return chart.basis.transpose() * sphere::log(chart.base.coords(), x.coords());
  if (chart.metric == SpdMetric::log_euclidean) return vec_sym(spd::log_matrix(x.matrix()) - chart.log_base);
  return vec_sym(spd::whitened_log(chart.inv_root, x.matrix()));
}

/// Raw bump exp(-s / (1 - (t/r)^2)) of the chord distance t, zero for t >= r.
inline double bump(double chord, double radius, double sharpness = 1.0) {
  const double u = chord / radius;
  if (!(u < 1.0)) return 0.0;
  return std::exp(-sharpness / (1.0 - u * u));
}

struct Atlas {
  std::vector<Chart> charts;
  double cover_tolerance = 0.0;

  std::size_t size() const { return charts.size(); }
};

/// Charts at the two poles +-e of a sphere, or at +-(centered, normalized
/// first axis) for preshapes.
inline Atlas two_pole_atlas(ManifoldKind kind, int ambient_size, double radius = 1.9) {
  if (kind == ManifoldKind::spd) throw Error(ErrorKind::invalid_spec, "SPD atlases need explicit base points");
  Vector e = Vector::Unit(ambient_size, 0);
  if (kind == ManifoldKind::preshape) {
    const Matrix c = shape::centering_directions(ambient_size / 2);
    e -= c * (c.transpose() * e);
  }
  e.normalize();
  auto make = [&](const Vector& v) {
    return kind == ManifoldKind::sphere ? ManifoldPoint::sphere_normalized(v) : shape::preshape(v);
  };
  Atlas a;
  a.charts.push_back(make_chart(make(e), radius, 0));
  a.charts.push_back(make_chart(make(-e), radius, 1));
  return a;
}

inline Atlas atlas_from_bases(const std::vector<ManifoldPoint>& bases, double radius,
                              SpdMetric metric = SpdMetric::affine) {
  if (bases.empty()) throw Error(ErrorKind::invalid_spec, "atlas needs at least one chart");
  Atlas a;
  for (std::size_t k = 0; k < bases.size(); ++k) {
    require_same_space(bases.front(), bases[k]);
    a.charts.push_back(make_chart(bases[k], radius, static_cast<int>(k), metric));
  }
  return a;
}

/// tau_k(x) = b_k(x) / sum_j b_j(x). Raises coverage-gap when no bump is
/// positive at x.
inline Vector partition_weights(const Atlas& atlas, const ManifoldPoint& x) {
  Vector w(static_cast<Eigen::Index>(atlas.size()));
  for (std::size_t k = 0; k < atlas.size(); ++k) {
    const Chart& c = atlas.charts[k];
    require_same_space(c.base, x);
    w(static_cast<Eigen::Index>(k)) = bump(c.base.chord_distance(x), c.radius, c.sharpness);
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::coverage_gap, "no chart covers " + x.describe());
  return w / total;
}

}  // namespace geodnn
