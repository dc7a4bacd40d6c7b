#include <cmath>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "geodnn/nn.hpp"
#include "gradcheck.hpp"

using namespace geodnn;

namespace {

NetworkParams identity_net() {
  NetworkParams p{{2, 2, 2}, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}, {Vector::Zero(2), Vector::Zero(2)}};
  return p;
}

}  // namespace

TEST(InitNetwork, DefaultArchitectureShapes) {
  const auto widths = make_widths(3, {100, 100, 100, 100, 100}, 1);
  const NetworkParams p = init_network(widths, 7);
  EXPECT_EQ(p.hidden_layers(), 5);
  ASSERT_EQ(p.weights.size(), 6u);
  ASSERT_EQ(p.biases.size(), 6u);
  EXPECT_EQ(p.weights[0].rows(), 100);
  EXPECT_EQ(p.weights[0].cols(), 3);
  EXPECT_EQ(p.weights[5].rows(), 1);
  EXPECT_EQ(p.weights[5].cols(), 100);
  EXPECT_EQ(forward(p, Vector::Ones(3)).size(), 1);
}

TEST(InitNetwork, BiasesExactlyZero) {
  const NetworkParams p = init_network({2, 1, 1}, 11);
  for (const auto& b : p.biases) EXPECT_TRUE((b.array() == 0.0).all());
}

TEST(InitNetwork, DeterministicGivenSeed) {
  EXPECT_EQ(init_network({4, 8, 8, 2}, 5), init_network({4, 8, 8, 2}, 5));
  EXPECT_NE(init_network({4, 8, 8, 2}, 5), init_network({4, 8, 8, 2}, 6));
}

TEST(InitNetwork, RejectsBadWidths) {
  for (const auto& w : std::vector<std::vector<int>>{{}, {3, 1}, {3, 0, 1}}) {
    try {
      init_network(w, 1);
      FAIL() << "expected invalid-spec";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_spec);
    }
  }
}

TEST(InitNetwork, HeScaleVariance) {
  // Sample variance of the 100x100 middle layers is 2 / 100.
  const NetworkParams p = init_network(make_widths(3, {100, 100, 100}, 1), 3);
  const Matrix& w = p.weights[1];
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  EXPECT_NEAR(var, 0.02, 0.002);
}

TEST(InitNetwork, MaxAbsBounded) {
  // Every draw is N(0, 2/fan_in); six standard deviations of the widest
  // distribution (smallest fan-in) bound all ~40k entries with overwhelming
  // probability.
  for (unsigned seed = 0; seed < 10; ++seed) {
    const NetworkParams p = init_network(make_widths(3, {100, 100, 100, 100, 100}, 2), seed);
    EXPECT_LE(sparsity_report(p).max_abs, 6.0 * std::sqrt(2.0 / 3.0));
  }
}

TEST(Forward, IdentityNetwork) {
  const NetworkParams p = identity_net();
  EXPECT_EQ(forward(p, Vector{{1.0, 2.0}}), (Vector{{1.0, 2.0}}));
  EXPECT_EQ(forward(p, Vector{{-1.0, 2.0}}), (Vector{{0.0, 2.0}}));
}

TEST(Forward, MatchesStraightLineEvaluation) {
  std::mt19937_64 rng(1);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const NetworkParams p = oracle::random_network({4, 7, 5, 6, 3}, seed);
    const Matrix x = oracle::random_matrix(4, 1, rng);
    const Vector got = forward(p, x.col(0));
    const auto want = oracle::naive_forward(p, {x.data(), x.data() + 4});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got(i), want[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(Forward, BatchEqualsColumnwise) {
  std::mt19937_64 rng(2);
  const NetworkParams p = oracle::random_network({3, 9, 9, 2}, 4);
  const Matrix x = oracle::random_matrix(3, 17, rng);
  const Matrix y = forward_batch(p, x);
  for (Eigen::Index i = 0; i < x.cols(); ++i) EXPECT_LT((y.col(i) - forward(p, x.col(i))).norm(), 1e-13);
}

TEST(Forward, ShapeError) {
  try {
    forward(identity_net(), Vector::Ones(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(Forward, PositiveHomogeneityOneHiddenLayer) {
  NetworkParams p = oracle::random_network({3, 6, 2}, 9);
  for (auto& b : p.biases) b.setZero();
  const Vector x{{0.3, -1.2, 0.8}};
  const Vector base = forward(p, x);
  const double c = 2.5;
  for (auto& w : p.weights) w *= c;
  EXPECT_LT((forward(p, x) - c * c * base).norm(), 1e-12);
}

TEST(Forward, ThreadPure) {
  const NetworkParams p = init_network(make_widths(5, {50, 50}, 3), 1);
  const Vector x = Vector::LinSpaced(5, -1.0, 1.0);
  const Vector ref = forward(p, x);
  std::vector<Vector> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { results[static_cast<std::size_t>(t)] = forward(p, x); });
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, ref);
}

TEST(Backward, DeadNetworkHasZeroUpperGradients) {
  NetworkParams p = init_network({3, 4, 4, 1}, 1).zeros_like();
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const BackwardResult r = backward(p, x, Values{0.0, 0.0}, LossKind::squared_error);
  EXPECT_EQ(r.loss, 0.0);
  for (std::size_t l = 1; l < r.grads.weights.size(); ++l) EXPECT_TRUE((r.grads.weights[l].array() == 0.0).all());
}

TEST(Backward, UniformSoftmaxLossIsLn2) {
  NetworkParams p = init_network({2, 3, 2}, 1).zeros_like();
  const BackwardResult r = backward(p, Matrix::Ones(2, 1), Labels{0}, LossKind::cross_entropy);
  EXPECT_NEAR(r.loss, std::numbers::ln2, 1e-15);
}

namespace {

void check_against_fd(const NetworkParams& p, const Matrix& x, const Targets& y, LossKind kind) {
  EXPECT_LT(oracle::network_gradient_error(p, x, y, kind), 1e-6);
}

}  // namespace

TEST(Backward, SquaredErrorMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const NetworkParams p = oracle::random_network({3, 6, 5, 1}, seed, 0.5);
    const Matrix x = oracle::random_matrix(3, 8, rng);
    Values y(8);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    check_against_fd(p, x, y, LossKind::squared_error);
  }
}

TEST(Backward, CrossEntropyMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const NetworkParams p = oracle::random_network({4, 7, 6, 3}, seed + 10, 0.5);
    const Matrix x = oracle::random_matrix(4, 9, rng);
    Labels y(9);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 3);
    check_against_fd(p, x, y, LossKind::cross_entropy);
  }
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const NetworkParams p = oracle::random_network({4, 6, 2}, 3);
  Matrix x = oracle::random_matrix(4, 3, rng);
  const Labels y{0, 1, 1};
  const ForwardTrace t = forward_trace(p, x);
  const LossEval le = evaluate_loss(t.output(), y, LossKind::cross_entropy);
  const Matrix dx = backward_from_output(p, t, le.d_output).input_grad;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    const double fd = (evaluate_loss(forward_batch(p, xp), y, LossKind::cross_entropy).loss -
                       evaluate_loss(forward_batch(p, xm), y, LossKind::cross_entropy).loss) / (2 * h);
    EXPECT_LT(oracle::rel_err(dx.data()[i], fd), 1e-6);
  }
}

TEST(Backward, ShapeMismatch) {
  const NetworkParams p = init_network({2, 3, 1}, 1);
  EXPECT_THROW(backward(p, Matrix::Ones(2, 3), Values{1.0}, LossKind::squared_error), Error);
  EXPECT_THROW(backward(p, Matrix::Ones(3, 1), Values{1.0}, LossKind::squared_error), Error);
  EXPECT_THROW(backward(p, Matrix::Ones(2, 1), Labels{0}, LossKind::squared_error), Error);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  NetworkParams p = init_network({2, 3, 1}, 1);
  const NetworkParams before = p;
  AdamState s = AdamState::for_params(p);
  adam_step(p, p.zeros_like(), s);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, ConstantGradientMovesOppositeSign) {
  NetworkParams p = init_network({2, 3, 1}, 1);
  const NetworkParams before = p;
  NetworkGradients g = p.zeros_like();
  g.weights[0](0, 0) = 0.7;
  g.biases[1](0) = -2.0;
  AdamState s = AdamState::for_params(p);
  for (int i = 0; i < 50; ++i) adam_step(p, g, s);
  EXPECT_LT(p.weights[0](0, 0), before.weights[0](0, 0));
  EXPECT_GT(p.biases[1](0), before.biases[1](0));
  EXPECT_EQ(p.weights[0](1, 1), before.weights[0](1, 1));
}

TEST(Adam, ScalarQuadraticConverges) {
  // Loss (b - 3)^2 on the output bias; minimizer b = 3.
  NetworkParams p = init_network({1, 1, 1}, 1).zeros_like();
  AdamState s = AdamState::for_params(p, {.learning_rate = 1e-2});
  int steps = 0;
  for (; steps < 5000; ++steps) {
    NetworkGradients g = p.zeros_like();
    g.biases[1](0) = 2.0 * (p.biases[1](0) - 3.0);
    adam_step(p, g, s);
  }
  EXPECT_NEAR(p.biases[1](0), 3.0, 1e-6);
}

TEST(Adam, NonFiniteGradientNamesLayer) {
  NetworkParams p = init_network({2, 3, 3, 1}, 1);
  const NetworkParams before = p;
  NetworkGradients g = p.zeros_like();
  g.weights[2](0, 1) = std::nan("");
  AdamState s = AdamState::for_params(p);
  try {
    adam_step(p, g, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 0);
}

TEST(Sparsity, Reports) {
  const NetworkParams p = init_network({3, 5, 1}, 2);
  EXPECT_EQ(sparsity_report(p).nonzero, 3u * 5u + 5u);  // Gaussian draws are nonzero
  const NetworkParams z = p.zeros_like();
  EXPECT_EQ(sparsity_report(z).nonzero, 0u);
  EXPECT_EQ(sparsity_report(z).max_abs, 0.0);
  NetworkParams one = z;
  one.weights[1](0, 2) = -3.5;
  one.weights[1](0, 2) = 3.5;
  EXPECT_EQ(sparsity_report(one).nonzero, 1u);
  EXPECT_EQ(sparsity_report(one).max_abs, 3.5);
}
