#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "geodnn/atlas.hpp"
#include "geodnn/synthdata.hpp"
#include "oracles.hpp"

using namespace geodnn;
using std::numbers::pi;

TEST(TangentBasis, OrthonormalAndTangent) {
  std::mt19937_64 rng(1);
  for (int n : {3, 4, 11, 51}) {
    const auto p = ManifoldPoint::sphere(uniform_sphere(n, rng));
    const Matrix b = tangent_basis(p);
    ASSERT_EQ(b.cols(), n - 1);
    EXPECT_LT((b.transpose() * b - Matrix::Identity(n - 1, n - 1)).norm(), 1e-9);
    EXPECT_LT((b.transpose() * p.coords()).norm(), 1e-9);
  }
}

TEST(TangentBasis, PreshapeExcludesCentering) {
  std::mt19937_64 rng(2);
  const auto z = shape::preshape(Vector(oracle::random_matrix(16, 1, rng).col(0)));
  const Matrix b = tangent_basis(z);
  ASSERT_EQ(b.cols(), 16 - 3);
  EXPECT_LT((b.transpose() * b - Matrix::Identity(13, 13)).norm(), 1e-9);
  EXPECT_LT((b.transpose() * shape::centering_directions(8)).norm(), 1e-9);
  EXPECT_LT((b.transpose() * z.coords()).norm(), 1e-9);
}

TEST(TangentBasis, NorthPoleUsesAxisOrder) {
  const Matrix b = tangent_basis(ManifoldPoint::sphere(Vector::Unit(3, 2)));
  EXPECT_LT((b.col(0) - Vector::Unit(3, 0)).norm(), 1e-15);
  EXPECT_LT((b.col(1) - Vector::Unit(3, 1)).norm(), 1e-15);
}

TEST(NormalCoords, Examples) {
  const Chart c = make_chart(ManifoldPoint::sphere(Vector::Unit(3, 2)));
  EXPECT_EQ(normal_coords(c, c.base), Vector::Zero(2));
  EXPECT_LT((normal_coords(c, ManifoldPoint::sphere(Vector::Unit(3, 0))) - Vector{{pi / 2, 0.0}}).norm(), 1e-15);
}

TEST(NormalCoords, NormIsGeodesicDistance) {
  std::mt19937_64 rng(3);
  for (int n : {3, 6, 51}) {
    const Chart c = make_chart(ManifoldPoint::sphere(uniform_sphere(n, rng)));
    for (int t = 0; t < 100; ++t) {
      const auto x = ManifoldPoint::sphere(uniform_sphere(n, rng));
      EXPECT_NEAR(normal_coords(c, x).norm(), sphere::distance(c.base.coords(), x.coords()), 1e-9);
    }
  }
}

TEST(NormalCoords, SpdWhitenedIsTwiceAffineDistance) {
  std::mt19937_64 rng(4);
  const Chart c = make_chart(ManifoldPoint::spd(oracle::random_spd(4, rng)));
  const auto x = ManifoldPoint::spd(oracle::random_spd(4, rng));
  EXPECT_NEAR(normal_coords(c, x).norm(), 2.0 * spd::distance(c.base.matrix(), x.matrix()), 1e-10);
  const Chart le = make_chart(c.base, 1.0, 0, SpdMetric::log_euclidean);
  EXPECT_NEAR(normal_coords(le, x).norm(), spd::distance(c.base.matrix(), x.matrix(), SpdMetric::log_euclidean), 1e-10);
}

TEST(NormalCoords, CutLocusPropagates) {
  const Chart c = make_chart(ManifoldPoint::sphere(Vector::Unit(3, 2)));
  try {
    normal_coords(c, ManifoldPoint::sphere(-Vector::Unit(3, 2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cut_locus);
  }
}

TEST(Chart, RejectsNonPositiveRadius) {
  EXPECT_THROW(make_chart(ManifoldPoint::sphere(Vector::Unit(3, 0)), 0.0), Error);
}

TEST(PartitionWeights, BasePointOwnsAllWeight) {
  const Atlas a = two_pole_atlas(ManifoldKind::sphere, 3, 1.9);
  const Vector w = partition_weights(a, a.charts[0].base);
  EXPECT_EQ(w, (Vector{{1.0, 0.0}}));
}

TEST(PartitionWeights, EquidistantPointSplitsEvenly) {
  const Atlas a = two_pole_atlas(ManifoldKind::sphere, 3, 1.9);
  const Vector w = partition_weights(a, ManifoldPoint::sphere(Vector::Unit(3, 1)));
  EXPECT_EQ(w(0), 0.5);
  EXPECT_EQ(w(1), 0.5);
}

TEST(PartitionWeights, UnitRadiusPolesLeaveGap) {
  // Chord radius 1 reaches geodesic angle pi/3 only, so the equator is uncovered.
  const Atlas a = two_pole_atlas(ManifoldKind::sphere, 3, 1.0);
  try {
    partition_weights(a, ManifoldPoint::sphere(Vector::Unit(3, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::coverage_gap);
  }
}

TEST(PartitionWeights, MonteCarloCoveringOnS2) {
  const Atlas a = two_pole_atlas(ManifoldKind::sphere, 3, 1.9);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto x = ManifoldPoint::sphere(uniform_sphere(3, rng));
    const Vector w = partition_weights(a, x);
    ASSERT_NEAR(w.sum(), 1.0, 1e-12);
    ASSERT_TRUE((w.array() >= 0.0).all());
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a.charts[k].base.chord_distance(x) >= a.charts[k].radius) ASSERT_EQ(w(static_cast<Eigen::Index>(k)), 0.0);
  }
}

TEST(PartitionWeights, BumpMatchesClosedForm) {
  EXPECT_DOUBLE_EQ(bump(0.0, 1.0), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(bump(0.5, 1.0), std::exp(-1.0 / 0.75));
  EXPECT_EQ(bump(1.0, 1.0), 0.0);
  EXPECT_EQ(bump(1.5, 1.0), 0.0);
}

TEST(Atlas, PreshapePolesAreValidPreshapes) {
  const Atlas a = two_pole_atlas(ManifoldKind::preshape, 20, 1.9);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.charts[0].base.kind(), ManifoldKind::preshape);
  EXPECT_LT((a.charts[0].base.coords() + a.charts[1].base.coords()).norm(), 1e-15);
  EXPECT_EQ(a.charts[0].dim(), 17);
}

TEST(Atlas, SpdFromBases) {
  std::mt19937_64 rng(6);
  const Atlas a = atlas_from_bases({ManifoldPoint::spd(oracle::random_spd(3, rng)),
                                    ManifoldPoint::spd(oracle::random_spd(3, rng))},
                                   10.0);
  const auto x = ManifoldPoint::spd(oracle::random_spd(3, rng));
  EXPECT_NEAR(partition_weights(a, x).sum(), 1.0, 1e-12);
  EXPECT_EQ(normal_coords(a.charts[0], x).size(), 6);
}
