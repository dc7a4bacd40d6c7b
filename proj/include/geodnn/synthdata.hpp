#pragma once

// Synthetic data: von Mises-Fisher sampling, vMF mixtures on spheres, noisy
// planar shapes, SPD classes and regression targets on S^d.
//
// Every generator is a pure function of its spec and seed (one mt19937_64
// stream per call).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "geodnn/dataset.hpp"
#include "geodnn/geometry.hpp"

namespace geodnn {

using Rng = std::mt19937_64;

struct VMFParams {
  Vector mu;
  double kappa = 0.0;
};

inline void validate(const VMFParams& p) {
  if (p.mu.size() < 2) throw Error(ErrorKind::invalid_spec, "vMF mean direction needs at least 2 coordinates");
  if (std::abs(p.mu.norm() - 1.0) > kUnitTolerance) throw Error(ErrorKind::invalid_spec, "vMF mean direction must be unit");
  if (!(p.kappa >= 0.0)) throw Error(ErrorKind::invalid_spec, "vMF concentration must be >= 0");
}

/// Uniform unit vector in R^n.
inline Vector uniform_sphere(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (;;) {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    const double s = v.norm();
    if (s > 1e-12) return v / s;
  }
}

/// Draws w = <mu, x> by Wood's rejection scheme: the target density on
/// [-1, 1] is proportional to exp(kappa w) (1 - w^2)^((p - 3) / 2) for the
/// sphere in R^p.
inline double sample_vmf_cosine(int p, double kappa, Rng& rng) {
  const double m = p - 1.0;
  const double root = std::sqrt(4.0 * kappa * kappa + m * m);
  const double b = m / (2.0 * kappa + root);  // (-2 kappa + root) / m, cancellation-free
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m * std::log(1.0 - x0 * x0);
  std::gamma_distribution<double> gamma(m / 2.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    const double g1 = gamma(rng), g2 = gamma(rng);
    const double z = g1 / (g1 + g2);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = unif(rng);
    if (kappa * w + m * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

inline Vector sample_vmf_one(const VMFParams& params, Rng& rng) {
  const auto p = static_cast<int>(params.mu.size());
  const double w = sample_vmf_cosine(p, params.kappa, rng);
  // Uniform direction orthogonal to mu.
  std::normal_distribution<double> normal;
  Vector v(p);
  double s = 0;
  do {
    for (int i = 0; i < p; ++i) v(i) = normal(rng);
    v -= params.mu.dot(v) * params.mu;
    s = v.norm();
  } while (s < 1e-12);
  Vector x = w * params.mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * (v / s);
  return x / x.norm();
}

inline std::vector<Vector> sample_vmf(const VMFParams& params, std::size_t n, Rng& rng) {
  validate(params);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_vmf_one(params, rng));
  return out;
}

/// n i.i.d. vMF(mu, kappa) unit vectors.
inline std::vector<Vector> sample_vmf(const VMFParams& params, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_vmf(params, n, rng);
}

// ---------------------------------------------------------------------------

/// Hierarchical vMF mixture: per class, `subcenters` centers u ~ vMF(mu_i,
/// kappa1); each observation picks one center uniformly and draws
/// x ~ vMF(u, kappa2).
struct MixtureSpec {
  int dimension = 2;  // sphere S^d
  int classes = 2;
  std::vector<Vector> centers;  // empty: e_0, e_1, ... (mutually orthogonal)
  double kappa1 = 4.0;
  double kappa2 = 20.0;
  int subcenters = 10;
  int per_class = 2000;
  std::uint64_t seed = 0;
};

inline std::vector<Vector> mixture_centers(const MixtureSpec& s) {
  if (!s.centers.empty()) return s.centers;
  if (s.classes > s.dimension + 1)
    throw Error(ErrorKind::invalid_spec, "default centers need classes <= dimension + 1");
  std::vector<Vector> c;
  for (int i = 0; i < s.classes; ++i) c.push_back(Vector::Unit(s.dimension + 1, i));
  return c;
}

inline nlohmann::json to_json(const MixtureSpec& s) {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : mixture_centers(s)) centers.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  return {{"generator", "vmf-mixture"}, {"dimension", s.dimension}, {"classes", s.classes},
          {"centers", centers},         {"kappa1", s.kappa1},       {"kappa2", s.kappa2},
          {"subcenters", s.subcenters}, {"per_class", s.per_class}, {"seed", s.seed}};
}

inline Dataset sample_mixture(const MixtureSpec& s) {
  if (s.dimension < 1 || s.classes < 1 || s.subcenters < 1 || s.per_class < 1)
    throw Error(ErrorKind::invalid_spec, "mixture spec needs positive dimension, classes, subcenters and per_class");
  if (!(s.kappa1 >= 0.0) || !(s.kappa2 >= 0.0)) throw Error(ErrorKind::invalid_spec, "kappa1 and kappa2 must be >= 0");
  const auto centers = mixture_centers(s);
  if (static_cast<int>(centers.size()) != s.classes) throw Error(ErrorKind::invalid_spec, "need one center per class");
  Rng rng(s.seed);
  Dataset d{{}, Labels{}, to_json(s)};
  auto& labels = std::get<Labels>(d.targets);
  d.inputs.reserve(static_cast<std::size_t>(s.classes * s.per_class));
  std::uniform_int_distribution<int> pick(0, s.subcenters - 1);
  for (int i = 0; i < s.classes; ++i) {
    if (centers[static_cast<std::size_t>(i)].size() != s.dimension + 1)
      throw Error(ErrorKind::invalid_spec, "center " + std::to_string(i) + " has wrong dimension");
    const auto sub = sample_vmf({centers[static_cast<std::size_t>(i)], s.kappa1}, static_cast<std::size_t>(s.subcenters), rng);
    for (int j = 0; j < s.per_class; ++j) {
      const Vector& m = sub[static_cast<std::size_t>(pick(rng))];
      d.inputs.push_back(ManifoldPoint::sphere(sample_vmf_one({m, s.kappa2}, rng)));
      labels.push_back(i);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

/// Landmark template of an ellipse with semi-axes (a, b) and a Gaussian
/// bump of the given height centred at angle `bump_at`.
inline Vector ellipse_template(int k, double a, double b, double bump_height = 0.0, double bump_at = 0.0,
                               double bump_width = 0.4) {
  Vector z(2 * k);
  for (int j = 0; j < k; ++j) {
    const double t = 2.0 * std::numbers::pi * j / k;
    double dt = std::remainder(t - bump_at, 2.0 * std::numbers::pi);
    const double r = 1.0 + bump_height * std::exp(-0.5 * dt * dt / (bump_width * bump_width));
    z(2 * j) = r * a * std::cos(t);
    z(2 * j + 1) = r * b * std::sin(t);
  }
  return z;
}

/// Noisy similarity-transformed copies of template shapes. Noise is added to
/// the template's preshape (unit size), then a random rotation in
/// [-rotation_range, rotation_range], scale in [0.5, 2] and translation are
/// applied before preshaping again.
struct PlanarShapeSpec {
  std::vector<Vector> templates;
  double sigma = 0.05;
  int per_class = 100;
  double rotation_range = std::numbers::pi;
  std::uint64_t seed = 0;
};

inline Dataset gen_planar_shapes(const PlanarShapeSpec& s) {
  if (s.templates.empty()) throw Error(ErrorKind::invalid_spec, "need at least one template");
  if (!(s.sigma >= 0.0)) throw Error(ErrorKind::invalid_spec, "shape noise sigma must be >= 0");
  if (s.per_class < 1) throw Error(ErrorKind::invalid_spec, "per_class must be >= 1");
  Rng rng(s.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(-s.rotation_range, s.rotation_range);
  std::uniform_real_distribution<double> log_scale(std::log(0.5), std::log(2.0));
  nlohmann::json prov{{"generator", "planar-shapes"}, {"sigma", s.sigma},     {"per_class", s.per_class},
                      {"rotation_range", s.rotation_range}, {"seed", s.seed}, {"templates", s.templates.size()},
                      {"landmarks", s.templates.front().size() / 2}};
  Dataset d{{}, Labels{}, prov};
  auto& labels = std::get<Labels>(d.targets);
  for (std::size_t c = 0; c < s.templates.size(); ++c) {
    Vector base;
    try {
      base = shape::preshape(s.templates[c]).coords();
    } catch (const Error& e) {
      rethrow_with_context(e, "template " + std::to_string(c));
    }
    for (int i = 0; i < s.per_class; ++i) {
      Vector z = base;
      if (s.sigma > 0.0)
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += s.sigma * normal(rng);
      const double th = angle(rng);
      const double sc = std::exp(log_scale(rng));
      const double tx = 5.0 * normal(rng), ty = 5.0 * normal(rng);
      d.inputs.push_back(shape::preshape(shape::similarity(z, th, sc, tx, ty)));
      labels.push_back(static_cast<int>(c));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

/// Per class, tangent noise S (symmetric, i.i.d. N(0, spread^2) entries on
/// and above the diagonal) mapped through Exp at the class base point.
struct SpdClassSpec {
  std::vector<Matrix> bases;
  double spread = 0.1;
  int per_class = 100;
  std::uint64_t seed = 0;
};

inline Matrix random_symmetric(int d, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) s(i, j) = s(j, i) = normal(rng);
  return s;
}

/// `classes` base points exp(B_c) with B_c random symmetric of entry scale
/// `separation`, deterministic in the seed.
inline std::vector<Matrix> random_spd_bases(int d, int classes, double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> out;
  for (int c = 0; c < classes; ++c) out.push_back(sym_exp(random_symmetric(d, separation, rng)));
  return out;
}

inline Dataset gen_spd_dataset(const SpdClassSpec& s) {
  if (s.bases.empty()) throw Error(ErrorKind::invalid_spec, "need at least one base matrix");
  if (!(s.spread >= 0.0)) throw Error(ErrorKind::invalid_spec, "spread must be >= 0");
  if (s.per_class < 1) throw Error(ErrorKind::invalid_spec, "per_class must be >= 1");
  const auto d = static_cast<int>(s.bases.front().rows());
  Rng rng(s.seed);
  Dataset dset{{}, Labels{}, {{"generator", "spd-classes"}, {"dimension", d}, {"classes", s.bases.size()},
                              {"spread", s.spread}, {"per_class", s.per_class}, {"seed", s.seed}}};
  auto& labels = std::get<Labels>(dset.targets);
  for (std::size_t c = 0; c < s.bases.size(); ++c) {
    const SymEig e = spd::checked_eig(s.bases[c], "class base");
    const Matrix root = spd_sqrt(e);
    const Matrix inv_root = spd_inv_sqrt(e);
    for (int i = 0; i < s.per_class; ++i) {
      const Matrix noise = random_symmetric(d, s.spread, rng);
      // Exp_base(S) with the whitening factors computed once per class.
      const Matrix p = s.spread == 0.0 ? s.bases[c]
                                        : Matrix(symmetrize(root * sym_exp(symmetrize(inv_root * noise * inv_root)) * root));
      dset.inputs.push_back(ManifoldPoint::spd(p));
      labels.push_back(static_cast<int>(c));
    }
  }
  return dset;
}

// ---------------------------------------------------------------------------

enum class RegressionFunction {
  smooth,    // sin(3 x_1) x_2 + x_3^2
  constant,  // c
};

inline double regression_target(RegressionFunction f, const Vector& x, double constant = 1.0) {
  switch (f) {
    case RegressionFunction::smooth: return std::sin(3.0 * x(0)) * x(1) + x(2) * x(2);
    case RegressionFunction::constant: return constant;
  }
  return 0.0;
}

inline std::string to_string(RegressionFunction f) {
  return f == RegressionFunction::smooth ? "smooth" : "constant";
}

struct RegressionSpec {
  RegressionFunction f0 = RegressionFunction::smooth;
  double constant = 1.0;
  double sigma = 0.1;
  int dimension = 2;
  int n = 1000;
  std::uint64_t seed = 0;
};

/// Uniform inputs on S^d, targets f0(x) + N(0, sigma^2).
inline Dataset gen_regression_sphere(const RegressionSpec& s) {
  if (!(s.sigma >= 0.0)) throw Error(ErrorKind::invalid_spec, "noise sigma must be >= 0");
  if (s.dimension < 2) throw Error(ErrorKind::invalid_spec, "regression functions need S^d with d >= 2");
  if (s.n < 1) throw Error(ErrorKind::invalid_spec, "n must be >= 1");
  Rng rng(s.seed);
  std::normal_distribution<double> normal;
  Dataset d{{}, Values{}, {{"generator", "sphere-regression"}, {"f0", to_string(s.f0)}, {"constant", s.constant},
                           {"sigma", s.sigma}, {"dimension", s.dimension}, {"n", s.n}, {"seed", s.seed}}};
  auto& y = std::get<Values>(d.targets);
  for (int i = 0; i < s.n; ++i) {
    Vector x = uniform_sphere(s.dimension + 1, rng);
    const double noise = s.sigma > 0.0 ? s.sigma * normal(rng) : 0.0;
    y.push_back(regression_target(s.f0, x, s.constant) + noise);
    d.inputs.push_back(ManifoldPoint::sphere(std::move(x)));
  }
  return d;
}

}  // namespace geodnn
