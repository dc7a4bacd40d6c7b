#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "geodnn/models.hpp"
#include "geodnn/synthdata.hpp"
#include "gradcheck.hpp"

using namespace geodnn;
using std::numbers::pi;

namespace {

std::vector<ManifoldPoint> sphere_points(int n, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ManifoldPoint> out;
  for (int i = 0; i < count; ++i) out.push_back(ManifoldPoint::sphere(uniform_sphere(n, rng)));
  return out;
}

using oracle::randomize;

template <class Model>
double gradient_error(const Model& m, const std::vector<ManifoldPoint>& xs, const Targets& y, LossKind loss) {
  return oracle::model_gradient_error(m, xs, y, loss);
}

}  // namespace

TEST(Embedding, CompatibilityRules) {
  EXPECT_NO_THROW(check_embedding(ManifoldKind::sphere, Embedding::inclusion));
  EXPECT_NO_THROW(check_embedding(ManifoldKind::preshape, Embedding::veronese_whitney));
  EXPECT_NO_THROW(check_embedding(ManifoldKind::spd, Embedding::matrix_log));
  EXPECT_THROW(check_embedding(ManifoldKind::spd, Embedding::inclusion), Error);
  EXPECT_THROW(check_embedding(ManifoldKind::sphere, Embedding::veronese_whitney), Error);
  EXPECT_EQ(embedding_dim(Embedding::veronese_whitney, 20), 100);
  EXPECT_EQ(embedding_dim(Embedding::matrix_log, 20), 210);
}

TEST(EDNN, SimilarityInvariantOnShapes) {
  std::mt19937_64 rng(1);
  EDNNModel m = make_ednn(ManifoldKind::preshape, Embedding::veronese_whitney, 12, {8, 8}, 3, 2);
  randomize(m, 3);
  for (int t = 0; t < 20; ++t) {
    const Vector xy = oracle::random_matrix(12, 1, rng).col(0);
    const Vector moved = shape::similarity(xy, 2 * pi * (t / 20.0) - pi, 0.3 + 0.2 * t, 3.0 - t, 0.5 * t);
    const Vector a = ednn_forward(m, shape::preshape(xy));
    const Vector b = ednn_forward(m, shape::preshape(moved));
    EXPECT_LT((a - b).norm(), 1e-9 * std::max(1.0, a.norm()));
  }
}

TEST(EDNN, RejectsWrongManifold) {
  const EDNNModel m = make_ednn(ManifoldKind::sphere, Embedding::inclusion, 3, {4}, 1, 1);
  const std::vector<ManifoldPoint> xs{ManifoldPoint::sphere(Vector::Unit(4, 0))};
  EXPECT_THROW(predict(m, std::span<const ManifoldPoint>(xs)), Error);
}

TEST(TDNN, ConstantNetworkGivesConstantOutput) {
  TDNNModel m = make_tdnn(make_chart(ManifoldPoint::sphere(Vector::Unit(3, 2))), {5}, 2, 4);
  for (auto& w : m.net.weights) w.setZero();
  m.net.biases.back() = Vector{{0.7, -1.1}};
  for (const auto& x : sphere_points(3, 50, 5)) {
    if (x.coords()(2) < -0.99) continue;  // near the cut locus
    EXPECT_EQ(tdnn_forward(m, x), (Vector{{0.7, -1.1}}));
  }
}

TEST(IDNN, SingleChartMatchesTDNN) {
  const Chart c = make_chart(ManifoldPoint::sphere(Vector::Unit(3, 2)), 1.9);
  TDNNModel t = make_tdnn(c, {6, 4}, 2, 7);
  randomize(t, 8);
  IDNNModel i = make_idnn(Atlas{{c}}, {6, 4}, 2, 0);
  i.nets[0] = t.net;
  for (const auto& x : sphere_points(3, 200, 9)) {
    if (c.base.chord_distance(x) >= c.radius) continue;
    EXPECT_LT((idnn_forward(i, x) - tdnn_forward(t, x)).norm(), 1e-12);
  }
}

TEST(IDNN, ConstantNetworksGiveConstantOutput) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {5}, 1, 10);
  for (auto& net : m.nets) {
    for (auto& w : net.weights) w.setZero();
    net.biases.back()(0) = 2.5;
  }
  for (const auto& x : sphere_points(3, 500, 11)) EXPECT_NEAR(idnn_forward(m, x)(0), 2.5, 1e-12);
}

TEST(IDNN, ChartPermutationInvariant) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 4), {6}, 2, 12);
  randomize(m, 13);
  IDNNModel swapped = m;
  std::swap(swapped.atlas.charts[0], swapped.atlas.charts[1]);
  std::swap(swapped.nets[0], swapped.nets[1]);
  const auto xs = sphere_points(4, 100, 14);
  EXPECT_LT((predict(m, std::span<const ManifoldPoint>(xs)) - predict(swapped, std::span<const ManifoldPoint>(xs))).norm(),
            1e-12);
}

TEST(IDNN, ContinuousAcrossMeridian) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {16, 16}, 1, 15);
  randomize(m, 16);
  // Pole to pole, passing through the overlap where both charts switch on/off.
  double prev = idnn_forward(m, ManifoldPoint::sphere(Vector::Unit(3, 2)))(0);
  const int steps = 20000;
  double worst = 0.0;
  for (int s = 1; s <= steps; ++s) {
    const double th = pi * s / steps;
    const double now = idnn_forward(m, ManifoldPoint::sphere(Vector{{std::sin(th), 0.0, std::cos(th)}}))(0);
    worst = std::max(worst, std::abs(now - prev));
    prev = now;
  }
  EXPECT_LT(worst, 1e-2);
}

TEST(IDNN, OutputsFiniteEverywhere) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {8}, 3, 17);
  const auto xs = sphere_points(3, 5000, 18);
  EXPECT_TRUE(predict(m, std::span<const ManifoldPoint>(xs)).allFinite());
}

TEST(IDNN, WrongNetworkCountRejected) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {4}, 1, 19);
  m.nets.pop_back();
  EXPECT_THROW(validate(m), Error);
}

TEST(IDNN, InactiveChartGetsZeroGradient) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {5}, 1, 20);
  randomize(m, 21);
  // Both samples sit at the north pole's base, so tau = (1, 0).
  const std::vector<ManifoldPoint> xs{m.atlas.charts[0].base, m.atlas.charts[0].base};
  const ModelGradients g = model_gradients(m, xs, Values{1.0, -1.0}, LossKind::squared_error);
  for (double v : oracle::flatten(g.nets[1])) EXPECT_EQ(v, 0.0);
  bool any = false;
  for (double v : oracle::flatten(g.nets[0])) any = any || v != 0.0;
  EXPECT_TRUE(any);
}

TEST(ModelGradients, MatchFiniteDifferences) {
  const auto xs = sphere_points(3, 12, 22);
  Values y;
  Labels labels;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    y.push_back(std::sin(static_cast<double>(i)));
    labels.push_back(static_cast<int>(i % 3));
  }
  EDNNModel e = make_ednn(ManifoldKind::sphere, Embedding::inclusion, 3, {7, 5}, 1, 23);
  randomize(e, 24);
  EXPECT_LT(gradient_error(e, xs, y, LossKind::squared_error), 1e-6);

  TDNNModel t = make_tdnn(make_chart(ManifoldPoint::sphere(Vector::Unit(3, 0))), {6}, 3, 25);
  randomize(t, 26);
  std::vector<ManifoldPoint> near;
  for (const auto& x : xs)
    if (x.coords()(0) > -0.9) near.push_back(x);
  EXPECT_LT(gradient_error(t, near, Labels(labels.begin(), labels.begin() + static_cast<long>(near.size())),
                           LossKind::cross_entropy),
            1e-6);

  IDNNModel i = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {6, 4}, 3, 27);
  randomize(i, 28);
  EXPECT_LT(gradient_error(i, xs, labels, LossKind::cross_entropy), 1e-6);
}

TEST(ModelGradients, ShapeAndSpdModels) {
  std::mt19937_64 rng(29);
  std::vector<ManifoldPoint> shapes, mats;
  for (int i = 0; i < 6; ++i) {
    shapes.push_back(shape::preshape(Vector(oracle::random_matrix(10, 1, rng).col(0))));
    mats.push_back(ManifoldPoint::spd(oracle::random_spd(3, rng)));
  }
  const Values y{0.1, 0.2, -0.3, 0.4, -0.5, 0.6};
  EDNNModel vw = make_ednn(ManifoldKind::preshape, Embedding::veronese_whitney, 10, {6}, 1, 30);
  randomize(vw, 31);
  EXPECT_LT(gradient_error(vw, shapes, y, LossKind::squared_error), 1e-6);
  IDNNModel ps = make_idnn(two_pole_atlas(ManifoldKind::preshape, 10), {5}, 1, 32);
  randomize(ps, 33);
  EXPECT_LT(gradient_error(ps, shapes, y, LossKind::squared_error), 1e-6);
  EDNNModel le = make_ednn(ManifoldKind::spd, Embedding::matrix_log, 3, {6}, 1, 34);
  randomize(le, 35);
  EXPECT_LT(gradient_error(le, mats, y, LossKind::squared_error), 1e-6);
}

TEST(ModelGradients, DuplicatedBatchUnchanged) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {6}, 2, 36);
  randomize(m, 37);
  auto xs = sphere_points(3, 10, 38);
  Labels y{0, 1, 0, 1, 1, 0, 0, 1, 1, 0};
  const ModelGradients once = model_gradients(m, xs, y, LossKind::cross_entropy);
  auto xs2 = xs;
  xs2.insert(xs2.end(), xs.begin(), xs.end());
  Labels y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  const ModelGradients twice = model_gradients(m, xs2, y2, LossKind::cross_entropy);
  EXPECT_NEAR(once.loss, twice.loss, 1e-14);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto a = oracle::flatten(once.nets[k]);
    const auto b = oracle::flatten(twice.nets[k]);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
  }
}

TEST(Encoding, ErrorsNameTheSample) {
  const TDNNModel m = make_tdnn(make_chart(ManifoldPoint::sphere(Vector::Unit(3, 2))), {3}, 1, 39);
  const std::vector<ManifoldPoint> xs{ManifoldPoint::sphere(Vector::Unit(3, 0)),
                                      ManifoldPoint::sphere(-Vector::Unit(3, 2))};
  try {
    encode(m, xs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cut_locus);
    EXPECT_NE(std::string(e.what()).find("sample 1"), std::string::npos);
  }
}

TEST(Encoding, SelectColumnsMatchesReencode) {
  IDNNModel m = make_idnn(two_pole_atlas(ManifoldKind::sphere, 3), {4}, 1, 40);
  randomize(m, 41);
  const auto xs = sphere_points(3, 30, 42);
  const ChartEncoding all = encode(m, xs);
  const std::vector<int> idx{3, 7, 11, 29};
  std::vector<ManifoldPoint> sub;
  for (int i : idx) sub.push_back(xs[static_cast<std::size_t>(i)]);
  EXPECT_LT((predict_encoded(m, select_columns(all, idx)) - predict(m, std::span<const ManifoldPoint>(sub))).norm(),
            1e-14);
}
