#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "geodnn/synthdata.hpp"
#include "oracles.hpp"

using namespace geodnn;

namespace {

Vector mean_of(const std::vector<Vector>& xs) {
  Vector m = Vector::Zero(xs.front().size());
  for (const auto& x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

}  // namespace

TEST(Vmf, KappaZeroIsUniform) {
  const auto xs = sample_vmf({Vector::Unit(3, 0), 0.0}, 20000, 1);
  EXPECT_LT(mean_of(xs).norm(), 0.05);
  for (const auto& x : xs) ASSERT_NEAR(x.norm(), 1.0, 1e-12);
}

TEST(Vmf, LargeKappaConcentrates) {
  Rng rng(2);
  for (int p : {3, 5, 51}) {
    const Vector mu = uniform_sphere(p, rng);
    const Vector m = mean_of(sample_vmf({mu, 200.0 * p}, 5000, rng));
    EXPECT_LT((m.normalized() - mu).norm(), 0.05) << "p=" << p;
  }
}

TEST(Vmf, MeanCosineMatchesQuadrature) {
  // E[t] with density proportional to exp(kappa t) (1 - t^2)^((p-3)/2).
  for (int p : {3, 4}) {
    const double kappa = 5.0;
    auto w = [&](double t) { return std::exp(kappa * t) * std::pow(1.0 - t * t, (p - 3) / 2.0); };
    const double z = oracle::simpson(w, -1.0, 1.0, 20000);
    const double expect = oracle::simpson([&](double t) { return t * w(t); }, -1.0, 1.0, 20000) / z;
    const Vector mu = Vector::Unit(p, p - 1);
    const auto xs = sample_vmf({mu, kappa}, 100000, 3);
    double mean = 0.0;
    for (const auto& x : xs) mean += mu.dot(x);
    mean /= static_cast<double>(xs.size());
    EXPECT_NEAR(mean, expect, 0.02) << "p=" << p;
  }
}

TEST(Vmf, CosineDistributionKolmogorovSmirnov) {
  // On S^2 the cosine has CDF (e^{kt} - e^{-k}) / (e^{k} - e^{-k}).
  for (double kappa : {0.5, 3.0, 40.0}) {
    Rng rng(4);
    const int n = 20000;
    std::vector<double> t(n);
    for (auto& v : t) v = sample_vmf_cosine(3, kappa, rng);
    std::sort(t.begin(), t.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = std::expm1(kappa * (t[i] + 1.0)) / std::expm1(2.0 * kappa);
      d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(n))) << "kappa=" << kappa;
  }
}

TEST(Vmf, RejectsBadParameters) {
  EXPECT_THROW(sample_vmf({Vector{{1.0, 1.0}}, 1.0}, 1, 1), Error);
  EXPECT_THROW(sample_vmf({Vector::Unit(3, 0), -1.0}, 1, 1), Error);
}

TEST(Mixture, TightSubcentersSitOnClassCenters) {
  MixtureSpec s;
  s.kappa1 = 1e6;
  s.kappa2 = 1e6;
  s.per_class = 50;
  s.seed = 5;
  const Dataset d = sample_mixture(s);
  ASSERT_EQ(d.size(), 100u);
  const auto& y = std::get<Labels>(d.targets);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_LT((d.inputs[i].coords() - Vector::Unit(3, y[i])).norm(), 0.01);
}

TEST(Mixture, DeterministicInSeed) {
  MixtureSpec s;
  s.per_class = 30;
  s.seed = 6;
  const Dataset a = sample_mixture(s), b = sample_mixture(s);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.inputs[i].coords(), b.inputs[i].coords());
  s.seed = 7;
  EXPECT_NE(sample_mixture(s).inputs[0].coords(), a.inputs[0].coords());
  EXPECT_EQ(a.provenance["kappa2"], 20.0);
}

TEST(Mixture, TooManyDefaultCenters) {
  MixtureSpec s;
  s.classes = 4;
  EXPECT_THROW(sample_mixture(s), Error);
}

TEST(PlanarShapes, NoNoiseGivesTemplateShape) {
  PlanarShapeSpec s;
  s.templates = {ellipse_template(10, 2.0, 1.0), ellipse_template(10, 1.0, 1.0, 0.5, 1.0)};
  s.sigma = 0.0;
  s.per_class = 20;
  s.seed = 8;
  const Dataset d = gen_planar_shapes(s);
  const auto& y = std::get<Labels>(d.targets);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Vector f = shape::vw_embed(d.inputs[i]);
    const Vector want = shape::vw_embed(shape::preshape(s.templates[static_cast<std::size_t>(y[i])]));
    EXPECT_LT((f - want).norm(), 1e-10);
  }
}

TEST(PlanarShapes, DegenerateTemplateRejected) {
  PlanarShapeSpec s;
  s.templates = {Vector::Zero(8)};
  EXPECT_THROW(gen_planar_shapes(s), Error);
}

TEST(SpdData, ZeroSpreadReturnsBases) {
  SpdClassSpec s;
  s.bases = random_spd_bases(4, 3, 0.5, 9);
  s.spread = 0.0;
  s.per_class = 5;
  const Dataset d = gen_spd_dataset(s);
  const auto& y = std::get<Labels>(d.targets);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_LT((d.inputs[i].matrix() - s.bases[static_cast<std::size_t>(y[i])]).norm(), 1e-12);
}

TEST(SpdData, SpreadControlsDistance) {
  SpdClassSpec s;
  s.bases = {Matrix::Identity(3, 3)};
  s.spread = 0.1;
  s.per_class = 2000;
  s.seed = 10;
  const Dataset d = gen_spd_dataset(s);
  // At the identity, 2 * affine distance is the Frobenius norm of the noise:
  // E ||S||_F^2 = 9 spread^2.
  double ms = 0.0;
  for (const auto& x : d.inputs) ms += std::pow(2.0 * spd::distance(Matrix::Identity(3, 3), x.matrix()), 2);
  EXPECT_NEAR(ms / static_cast<double>(d.size()), 9 * 0.01, 0.01);
}

TEST(Regression, NoiseVarianceAndFunction) {
  RegressionSpec s;
  s.n = 20000;
  s.seed = 11;
  const Dataset d = gen_regression_sphere(s);
  const auto& y = std::get<Values>(d.targets);
  double var = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Vector& x = d.inputs[i].coords();
    const double r = y[i] - (std::sin(3 * x(0)) * x(1) + x(2) * x(2));
    var += r * r;
  }
  EXPECT_NEAR(var / static_cast<double>(d.size()), 0.01, 0.001);
  s.f0 = RegressionFunction::constant;
  s.sigma = 0.0;
  s.n = 10;
  const Dataset c = gen_regression_sphere(s);
  for (double v : std::get<Values>(c.targets)) EXPECT_EQ(v, 1.0);
}

TEST(DatasetCsv, RoundTripsEveryManifold) {
  const auto dir = std::filesystem::temp_directory_path() / "geodnn_synth_test";
  std::filesystem::create_directories(dir);
  MixtureSpec ms;
  ms.per_class = 5;
  PlanarShapeSpec ps;
  ps.templates = {ellipse_template(6, 2.0, 1.0)};
  ps.per_class = 4;
  SpdClassSpec ss;
  ss.bases = random_spd_bases(3, 2, 0.5, 1);
  ss.per_class = 3;
  RegressionSpec rs;
  rs.n = 7;
  for (const Dataset& d : {sample_mixture(ms), gen_planar_shapes(ps), gen_spd_dataset(ss), gen_regression_sphere(rs)}) {
    const std::string path = (dir / "d.csv").string();
    io::write_dataset_csv(d, path);
    const Dataset back = io::read_dataset_csv(path);
    ASSERT_EQ(back.size(), d.size());
    EXPECT_EQ(back.targets, d.targets);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(back.inputs[i].tag(), d.inputs[i].tag());
      if (d.inputs[i].is_vector())
        EXPECT_EQ(back.inputs[i].coords(), d.inputs[i].coords());
      else
        EXPECT_EQ(back.inputs[i].matrix(), d.inputs[i].matrix());
    }
  }
  std::filesystem::remove_all(dir);
}
