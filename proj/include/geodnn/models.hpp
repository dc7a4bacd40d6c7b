#pragma once

// Manifold networks built from fixed geometric feature maps and dense
// networks:
//   eDNN  f(x) = g(J(x))                       J an embedding into R^D
//   tDNN  f(x) = g(coords of log_xbar(x))      one chart at a base point
//   iDNN  f(x) = sum_k tau_k(x) g_k(coords of log_{x_k}(x))
//
// The geometric maps carry no parameters, so training sees them as feature
// transforms: every model is "encoded" once into matrices that the dense
// networks consume, and gradients flow only into network parameters.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geodnn/atlas.hpp"
#include "geodnn/nn.hpp"

namespace geodnn {

// `ambient` feeds raw coordinates (SPD: vec_sym of the matrix itself); it is
// the plain-DNN baseline, not a structure-preserving embedding.
enum class Embedding { inclusion, veronese_whitney, matrix_log, ambient };

inline std::string to_string(Embedding e) {
  switch (e) {
    case Embedding::inclusion: return "inclusion";
    case Embedding::veronese_whitney: return "veronese-whitney";
    case Embedding::matrix_log: return "matrix-log";
    case Embedding::ambient: return "ambient";
  }
  return "unknown";
}

inline void check_embedding(ManifoldKind m, Embedding e) {
  const bool ok = e == Embedding::ambient || (e == Embedding::inclusion && m != ManifoldKind::spd) ||
                  (e == Embedding::veronese_whitney && m == ManifoldKind::preshape) ||
                  (e == Embedding::matrix_log && m == ManifoldKind::spd);
  if (!ok) throw Error(ErrorKind::invalid_spec, "embedding " + to_string(e) + " does not apply to " + to_string(m));
}

/// Output length of the embedding for points with the given ambient size.
inline int embedding_dim(Embedding e, int ambient_size) {
  switch (e) {
    case Embedding::inclusion: return ambient_size;
    case Embedding::veronese_whitney: return shape::vw_feature_count(ambient_size / 2);
    case Embedding::matrix_log: return sym_feature_count(ambient_size);
    case Embedding::ambient: return ambient_size;
  }
  return 0;
}

inline Vector embed(Embedding e, const ManifoldPoint& x) {
  check_embedding(x.kind(), e);
  switch (e) {
    case Embedding::inclusion: return x.coords();
    case Embedding::veronese_whitney: return shape::vw_embed(x);
    case Embedding::matrix_log: return spd::embed(x);
    case Embedding::ambient: return x.is_vector() ? x.coords() : vec_sym(x.matrix());
  }
  return {};
}

struct EDNNModel {
  ManifoldKind manifold = ManifoldKind::sphere;
  Embedding embedding = Embedding::inclusion;
  NetworkParams net;

  std::span<NetworkParams> networks() { return {&net, 1}; }
  std::span<const NetworkParams> networks() const { return {&net, 1}; }
};

struct TDNNModel {
  Chart chart;
  NetworkParams net;

  std::span<NetworkParams> networks() { return {&net, 1}; }
  std::span<const NetworkParams> networks() const { return {&net, 1}; }
};

struct IDNNModel {
  Atlas atlas;
  std::vector<NetworkParams> nets;

  std::span<NetworkParams> networks() { return nets; }
  std::span<const NetworkParams> networks() const { return nets; }
};

inline EDNNModel make_ednn(ManifoldKind manifold, Embedding embedding, int ambient_size, const std::vector<int>& hidden,
                           int outputs, std::uint64_t seed) {
  check_embedding(manifold, embedding);
  return {manifold, embedding, init_network(make_widths(embedding_dim(embedding, ambient_size), hidden, outputs), seed)};
}

inline TDNNModel make_tdnn(Chart chart, const std::vector<int>& hidden, int outputs, std::uint64_t seed) {
  const int d = chart.dim();
  return {std::move(chart), init_network(make_widths(d, hidden, outputs), seed)};
}

/// Independent networks per chart, seeded seed, seed + 1, ...
inline IDNNModel make_idnn(Atlas atlas, const std::vector<int>& hidden, int outputs, std::uint64_t seed) {
  if (atlas.charts.empty()) throw Error(ErrorKind::invalid_spec, "iDNN needs at least one chart");
  IDNNModel m{std::move(atlas), {}};
  for (std::size_t k = 0; k < m.atlas.size(); ++k)
    m.nets.push_back(init_network(make_widths(m.atlas.charts[k].dim(), hidden, outputs), seed + k));
  return m;
}

inline void validate(const IDNNModel& m) {
  if (m.nets.size() != m.atlas.size())
    throw Error(ErrorKind::invalid_spec, "iDNN has " + std::to_string(m.nets.size()) + " networks for " +
                                             std::to_string(m.atlas.size()) + " charts");
  for (std::size_t k = 0; k < m.nets.size(); ++k) {
    if (m.nets[k].output_width() != m.nets.front().output_width())
      throw Error(ErrorKind::invalid_spec, "iDNN networks disagree on output width");
    if (m.nets[k].input_width() != m.atlas.charts[k].dim())
      throw Error(ErrorKind::invalid_spec, "iDNN network " + std::to_string(k) + " input width != chart dimension");
  }
}

// ---------------------------------------------------------------------------
// Encoding: the fixed geometric feature maps, applied to a set of points.

namespace detail {
template <class F>
void for_each_sample(std::span<const ManifoldPoint> xs, F&& f) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    try {
      f(i, xs[i]);
    } catch (const Error& e) {
      rethrow_with_context(e, "sample " + std::to_string(i));
    }
  }
}
}  // namespace detail

inline Matrix encode(const EDNNModel& m, std::span<const ManifoldPoint> xs) {
  Matrix out(m.net.input_width(), static_cast<Eigen::Index>(xs.size()));
  detail::for_each_sample(xs, [&](std::size_t i, const ManifoldPoint& x) {
    if (x.kind() != m.manifold) throw Error(ErrorKind::invalid_spec, "eDNN built for " + to_string(m.manifold) + ", got " + x.tag());
    Vector f = embed(m.embedding, x);
    if (f.size() != out.rows()) throw Error(ErrorKind::shape, "embedding length " + std::to_string(f.size()) + " != network input width");
    out.col(static_cast<Eigen::Index>(i)) = f;
  });
  return out;
}

inline Matrix encode(const TDNNModel& m, std::span<const ManifoldPoint> xs) {
  Matrix out(m.net.input_width(), static_cast<Eigen::Index>(xs.size()));
  detail::for_each_sample(xs, [&](std::size_t i, const ManifoldPoint& x) {
    out.col(static_cast<Eigen::Index>(i)) = normal_coords(m.chart, x);
  });
  return out;
}

/// Charts whose weight falls below this are skipped; their log map may be
/// undefined there and their contribution is zero to double precision.
inline constexpr double kChartWeightThreshold = 1e-12;

struct ChartEncoding {
  Matrix weights;               // K x n partition-of-unity values
  std::vector<Matrix> coords;   // per chart, d_k x n (zero where inactive)
  std::vector<std::vector<int>> active;  // per chart, sample columns with weight >= threshold

  Eigen::Index samples() const { return weights.cols(); }
};

inline ChartEncoding encode(const IDNNModel& m, std::span<const ManifoldPoint> xs) {
  validate(m);
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto K = m.atlas.size();
  ChartEncoding enc{Matrix::Zero(static_cast<Eigen::Index>(K), n), {}, std::vector<std::vector<int>>(K)};
  for (std::size_t k = 0; k < K; ++k) enc.coords.push_back(Matrix::Zero(m.atlas.charts[k].dim(), n));
  detail::for_each_sample(xs, [&](std::size_t i, const ManifoldPoint& x) {
    const Vector tau = partition_weights(m.atlas, x);
    const auto col = static_cast<Eigen::Index>(i);
    enc.weights.col(col) = tau;
    for (std::size_t k = 0; k < K; ++k) {
      if (tau(static_cast<Eigen::Index>(k)) < kChartWeightThreshold) continue;
      enc.coords[k].col(col) = normal_coords(m.atlas.charts[k], x);
      enc.active[k].push_back(static_cast<int>(i));
    }
  });
  return enc;
}

/// Columns `idx` of an encoding.
inline Matrix select_columns(const Matrix& enc, const std::vector<int>& idx) { return enc(Eigen::all, idx); }

inline ChartEncoding select_columns(const ChartEncoding& enc, const std::vector<int>& idx) {
  ChartEncoding out{enc.weights(Eigen::all, idx), {}, std::vector<std::vector<int>>(enc.coords.size())};
  for (std::size_t k = 0; k < enc.coords.size(); ++k) {
    out.coords.push_back(enc.coords[k](Eigen::all, idx));
    for (std::size_t j = 0; j < idx.size(); ++j)
      if (out.weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) >= kChartWeightThreshold)
        out.active[k].push_back(static_cast<int>(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward passes

inline Matrix predict_encoded(const EDNNModel& m, const Matrix& enc) { return forward_batch(m.net, enc); }
inline Matrix predict_encoded(const TDNNModel& m, const Matrix& enc) { return forward_batch(m.net, enc); }

inline Matrix predict_encoded(const IDNNModel& m, const ChartEncoding& enc) {
  Matrix out = Matrix::Zero(m.nets.front().output_width(), enc.samples());
  for (std::size_t k = 0; k < m.nets.size(); ++k) {
    const auto& idx = enc.active[k];
    if (idx.empty()) continue;
    const Matrix yk = forward_batch(m.nets[k], enc.coords[k](Eigen::all, idx));
    for (std::size_t j = 0; j < idx.size(); ++j)
      out.col(idx[j]) += enc.weights(static_cast<Eigen::Index>(k), idx[j]) * yk.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

template <class Model>
Matrix predict(const Model& m, std::span<const ManifoldPoint> xs) {
  return predict_encoded(m, encode(m, xs));
}

inline Vector ednn_forward(const EDNNModel& m, const ManifoldPoint& x) {
  return predict(m, std::span<const ManifoldPoint>(&x, 1)).col(0);
}

inline Vector tdnn_forward(const TDNNModel& m, const ManifoldPoint& x) {
  return predict(m, std::span<const ManifoldPoint>(&x, 1)).col(0);
}

inline Vector idnn_forward(const IDNNModel& m, const ManifoldPoint& x) {
  return predict(m, std::span<const ManifoldPoint>(&x, 1)).col(0);
}

// ---------------------------------------------------------------------------
// Gradients

struct ModelGradients {
  double loss = 0.0;
  std::vector<NetworkGradients> nets;
};

inline ModelGradients encoded_gradients(const NetworkParams& net, const Matrix& enc, const Targets& y, LossKind loss) {
  BackwardResult r = backward(net, enc, y, loss);
  ModelGradients g{r.loss, {}};
  g.nets.push_back(std::move(r.grads));
  return g;
}

inline ModelGradients encoded_gradients(const EDNNModel& m, const Matrix& enc, const Targets& y, LossKind loss) {
  return encoded_gradients(m.net, enc, y, loss);
}

inline ModelGradients encoded_gradients(const TDNNModel& m, const Matrix& enc, const Targets& y, LossKind loss) {
  return encoded_gradients(m.net, enc, y, loss);
}

/// dL/d(output of g_k) is tau_k times dL/d(model output); charts inactive on
/// every sample get exactly zero gradients.
inline ModelGradients encoded_gradients(const IDNNModel& m, const ChartEncoding& enc, const Targets& y, LossKind loss) {
  const auto K = m.nets.size();
  std::vector<ForwardTrace> traces;
  traces.reserve(K);
  Matrix out = Matrix::Zero(m.nets.front().output_width(), enc.samples());
  for (std::size_t k = 0; k < K; ++k) {
    const auto& idx = enc.active[k];
    traces.push_back(forward_trace(m.nets[k], enc.coords[k](Eigen::all, idx)));
    if (idx.empty()) continue;
    const Matrix yk = traces.back().output();
    for (std::size_t j = 0; j < idx.size(); ++j)
      out.col(idx[j]) += enc.weights(static_cast<Eigen::Index>(k), idx[j]) * yk.col(static_cast<Eigen::Index>(j));
  }
  const LossEval le = evaluate_loss(out, y, loss);
  ModelGradients g{le.loss, {}};
  for (std::size_t k = 0; k < K; ++k) {
    const auto& idx = enc.active[k];
    if (idx.empty()) {
      g.nets.push_back(m.nets[k].zeros_like());
      continue;
    }
    Matrix d_out(le.d_output.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
      d_out.col(static_cast<Eigen::Index>(j)) = enc.weights(static_cast<Eigen::Index>(k), idx[j]) * le.d_output.col(idx[j]);
    g.nets.push_back(backward_from_output(m.nets[k], traces[k], d_out).grads);
  }
  return g;
}

/// Exact gradients of the mean batch loss w.r.t. every network of the model.
template <class Model>
ModelGradients model_gradients(const Model& m, std::span<const ManifoldPoint> xs, const Targets& y, LossKind loss) {
  if (xs.empty()) throw Error(ErrorKind::shape, "model_gradients: empty batch");
  return encoded_gradients(m, encode(m, xs), y, loss);
}

}  // namespace geodnn
