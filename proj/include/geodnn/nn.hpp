#pragma once

// Dense ReLU networks: parameters, forward/backward passes, losses, Adam.
//
// Batches are stored column-wise: an input batch is a p_0 x n matrix and the
// network output is p_{L+1} x n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "geodnn/error.hpp"
#include "geodnn/linalg.hpp"

namespace geodnn {

/// Widths (p_0, ..., p_{L+1}) with one affine layer between consecutive
/// widths. weights[l] is widths[l+1] x widths[l].
struct NetworkParams {
  std::vector<int> widths;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  int hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
  std::size_t layer_count() const { return weights.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  /// Same shapes, all entries zero.
  NetworkParams zeros_like() const {
    NetworkParams z{widths, {}, {}};
    for (std::size_t l = 0; l < weights.size(); ++l) {
      z.weights.push_back(Matrix::Zero(weights[l].rows(), weights[l].cols()));
      z.biases.push_back(Vector::Zero(biases[l].size()));
    }
    return z;
  }

  NetworkParams& operator+=(const NetworkParams& o) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      weights[l] += o.weights[l];
      biases[l] += o.biases[l];
    }
    return *this;
  }

  bool operator==(const NetworkParams&) const = default;
};

/// A gradient record has exactly the layout of the parameters it belongs to.
using NetworkGradients = NetworkParams;

inline void validate_widths(const std::vector<int>& widths) {
  if (widths.size() < 3)
    throw Error(ErrorKind::invalid_spec, "network needs input, output and at least one hidden layer width");
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (widths[i] < 1) throw Error(ErrorKind::invalid_spec, "width " + std::to_string(i) + " must be >= 1");
}

/// He-scaled Gaussian weights (variance 2 / fan-in), zero biases.
inline NetworkParams init_network(const std::vector<int>& widths, std::uint64_t seed) {
  validate_widths(widths);
  std::mt19937_64 rng(seed);
  NetworkParams p{widths, {}, {}};
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / widths[l]));
    Matrix w(widths[l + 1], widths[l]);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(widths[l + 1]));
  }
  return p;
}

/// Builds the architecture (input, hidden..., output).
inline std::vector<int> make_widths(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> w{input};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(output);
  return w;
}

inline void check_input_rows(const NetworkParams& p, Eigen::Index rows) {
  if (rows != p.input_width())
    throw Error(ErrorKind::shape, "network expects input width " + std::to_string(p.input_width()) + ", got " +
                                      std::to_string(rows));
}

/// Pre-activations of every layer, kept for the backward pass.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre;  // z_l = W_l a_{l-1} + b_l
  Matrix output() const { return pre.back(); }
};

inline ForwardTrace forward_trace(const NetworkParams& p, const Matrix& x) {
  check_input_rows(p, x.rows());
  ForwardTrace t{x, {}};
  t.pre.reserve(p.layer_count());
  Matrix a = x;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    Matrix z = p.weights[l] * a;
    z.colwise() += p.biases[l];
    if (l + 1 < p.layer_count()) a = z.cwiseMax(0.0);
    t.pre.push_back(std::move(z));
  }
  return t;
}

inline Matrix forward_batch(const NetworkParams& p, const Matrix& x) {
  check_input_rows(p, x.rows());
  Matrix a = x;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    Matrix z = p.weights[l] * a;
    z.colwise() += p.biases[l];
    a = (l + 1 < p.layer_count()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

inline Vector forward(const NetworkParams& p, const Vector& x) {
  return forward_batch(p, Matrix(x)).col(0);
}

struct BackwardPass {
  NetworkGradients grads;
  Matrix input_grad;
};

/// Reverse-mode pass given dL/d(output). ReLU'(0) is taken as 0.
inline BackwardPass backward_from_output(const NetworkParams& p, const ForwardTrace& t, const Matrix& d_out) {
  BackwardPass r{p.zeros_like(), {}};
  Matrix delta = d_out;
  for (std::size_t l = p.layer_count(); l-- > 0;) {
    const Matrix& a_prev_pre = l == 0 ? t.input : t.pre[l - 1];
    if (l == 0) {
      r.grads.weights[l].noalias() = delta * t.input.transpose();
    } else {
      r.grads.weights[l].noalias() = delta * a_prev_pre.cwiseMax(0.0).transpose();
    }
    r.grads.biases[l] = delta.rowwise().sum();
    Matrix back = p.weights[l].transpose() * delta;
    if (l > 0) back = back.cwiseProduct((a_prev_pre.array() > 0.0).cast<double>().matrix());
    delta = std::move(back);
  }
  r.input_grad = std::move(delta);
  return r;
}

// ---------------------------------------------------------------------------
// Losses

enum class LossKind { squared_error, cross_entropy };

using Labels = std::vector<int>;
using Values = std::vector<double>;
using Targets = std::variant<Labels, Values>;

inline std::size_t target_count(const Targets& t) {
  return std::visit([](const auto& v) { return v.size(); }, t);
}

inline bool is_classification(const Targets& t) { return std::holds_alternative<Labels>(t); }

inline int class_count(const Labels& labels) {
  int k = 0;
  for (int y : labels) k = std::max(k, y + 1);
  return k;
}

/// Picks targets at the given positions.
inline Targets select_targets(const Targets& t, const std::vector<int>& idx) {
  return std::visit(
      [&](const auto& v) -> Targets {
        std::decay_t<decltype(v)> out;
        out.reserve(idx.size());
        for (int i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
        return out;
      },
      t);
}

struct LossEval {
  double loss = 0.0;
  Matrix d_output;  // gradient of the mean loss w.r.t. the network output
};

/// Mean loss over the batch and its gradient w.r.t. `output`.
inline LossEval evaluate_loss(const Matrix& output, const Targets& targets, LossKind kind) {
  const auto n = output.cols();
  if (static_cast<std::size_t>(n) != target_count(targets) || n == 0)
    throw Error(ErrorKind::shape, "loss: batch has " + std::to_string(n) + " outputs and " +
                                      std::to_string(target_count(targets)) + " targets");
  LossEval r{0.0, Matrix::Zero(output.rows(), n)};
  if (kind == LossKind::squared_error) {
    const auto* y = std::get_if<Values>(&targets);
    if (!y) throw Error(ErrorKind::invalid_spec, "squared-error loss needs real-valued targets");
    if (output.rows() != 1) throw Error(ErrorKind::shape, "squared-error loss needs scalar output");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = output(0, i) - (*y)[static_cast<std::size_t>(i)];
      r.loss += e * e;
      r.d_output(0, i) = 2.0 * e / static_cast<double>(n);
    }
  } else {
    const auto* y = std::get_if<Labels>(&targets);
    if (!y) throw Error(ErrorKind::invalid_spec, "cross-entropy loss needs class labels");
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = (*y)[static_cast<std::size_t>(i)];
      if (label < 0 || label >= output.rows())
        throw Error(ErrorKind::shape, "label " + std::to_string(label) + " outside output width " +
                                          std::to_string(output.rows()));
      const double m = output.col(i).maxCoeff();
      const Vector e = (output.col(i).array() - m).exp().matrix();
      const double z = e.sum();
      r.loss += std::log(z) + m - output(label, i);
      r.d_output.col(i) = e / z;
      r.d_output(label, i) -= 1.0;
    }
    r.d_output /= static_cast<double>(n);
  }
  r.loss /= static_cast<double>(n);
  return r;
}

struct BackwardResult {
  NetworkGradients grads;
  double loss = 0.0;
};

/// Mean batch loss and its exact gradient w.r.t. every parameter.
inline BackwardResult backward(const NetworkParams& p, const Matrix& inputs, const Targets& targets, LossKind loss) {
  if (inputs.cols() == 0) throw Error(ErrorKind::shape, "backward: empty batch");
  const ForwardTrace t = forward_trace(p, inputs);
  LossEval le = evaluate_loss(t.pre.back(), targets, loss);
  BackwardPass bp = backward_from_output(p, t, le.d_output);
  return {std::move(bp.grads), le.loss};
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  NetworkParams first_moment;
  NetworkParams second_moment;
  long step = 0;

  static AdamState for_params(const NetworkParams& p, AdamConfig cfg = {}) {
    return {cfg, p.zeros_like(), p.zeros_like(), 0};
  }
};

inline void require_finite(const NetworkGradients& g) {
  for (std::size_t l = 0; l < g.weights.size(); ++l)
    if (!g.weights[l].allFinite() || !g.biases[l].allFinite())
      throw Error(ErrorKind::numeric, "non-finite gradient in layer " + std::to_string(l));
}

/// One bias-corrected Adam update, in place. Parameters are untouched when
/// the gradient carries a non-finite entry.
inline void adam_step(NetworkParams& params, const NetworkGradients& grads, AdamState& state) {
  if (grads.widths != params.widths || state.first_moment.widths != params.widths)
    throw Error(ErrorKind::shape, "adam_step: gradient/state shapes do not match parameters");
  require_finite(grads);
  const auto& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const double step_size = c.learning_rate / bc1;
  const double sqrt_bc2 = std::sqrt(bc2);
  auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    theta.array() -= step_size * m.array() / (v.array().sqrt() / sqrt_bc2 + c.epsilon);
  };
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    update(params.weights[l], grads.weights[l], state.first_moment.weights[l], state.second_moment.weights[l]);
    update(params.biases[l], grads.biases[l], state.first_moment.biases[l], state.second_moment.biases[l]);
  }
}

// ---------------------------------------------------------------------------

struct SparsityReport {
  std::size_t nonzero = 0;
  double max_abs = 0.0;
};

/// ||theta||_0 and ||theta||_inf over all weights and biases.
inline SparsityReport sparsity_report(const NetworkParams& p) {
  SparsityReport r;
  auto scan = [&r](const auto& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double x = a.data()[i];
      if (x != 0.0) ++r.nonzero;
      r.max_abs = std::max(r.max_abs, std::abs(x));
    }
  };
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    scan(p.weights[l]);
    scan(p.biases[l]);
  }
  return r;
}

}  // namespace geodnn
