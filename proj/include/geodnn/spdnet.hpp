#pragma once

// SPDNet: BiMap (W^T P W, W semi-orthogonal), ReEig (eigenvalue floor) and
// LogEig layers, followed by a dense network. Gradients through the spectral
// layers use the divided-difference (Daleckii-Krein) form; BiMap weights are
// updated on the Stiefel manifold with a QR retraction.
//
// The terminal map selects the model variant:
//   log_eig                 vec(log P)                       (eDNN / SPDNet)
//   tangent_affine          vec(log(B^{-1/2} P B^{-1/2}))    (tDNN, affine)
//   tangent_log_euclidean   vec(log P - log B)               (tDNN, log-Euclidean)
// where B is a base point held constant for differentiation.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geodnn/geometry.hpp"
#include "geodnn/nn.hpp"

namespace geodnn {

struct BiMapLayer {
  Matrix weight;  // p_in x p_out, orthonormal columns

  int in_size() const { return static_cast<int>(weight.rows()); }
  int out_size() const { return static_cast<int>(weight.cols()); }
};

struct ReEigLayer {
  double epsilon = 1e-4;
};

enum class SpdTerminal { log_eig, tangent_affine, tangent_log_euclidean };

inline std::string to_string(SpdTerminal t) {
  switch (t) {
    case SpdTerminal::log_eig: return "log-eig";
    case SpdTerminal::tangent_affine: return "tangent-affine";
    case SpdTerminal::tangent_log_euclidean: return "tangent-log-euclidean";
  }
  return "unknown";
}

inline Matrix bimap_forward(const BiMapLayer& layer, const Matrix& p) {
  if (p.rows() != layer.in_size() || p.cols() != layer.in_size())
    throw Error(ErrorKind::shape, "BiMap expects " + std::to_string(layer.in_size()) + "x" +
                                      std::to_string(layer.in_size()) + " input, got " + std::to_string(p.rows()) + "x" +
                                      std::to_string(p.cols()));
  return symmetrize(layer.weight.transpose() * p * layer.weight);
}

inline void require_symmetric_input(const Matrix& p) {
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if (!is_symmetric(p, kUnitTolerance * scale)) throw Error(ErrorKind::not_positive_definite, "ReEig input is not symmetric");
}

inline Matrix reeig_forward(const ReEigLayer& layer, const Matrix& p) {
  require_symmetric_input(p);
  const double eps = layer.epsilon;
  return sym_eig(p).apply([eps](double l) { return std::max(l, eps); });
}

inline Vector logeig_forward(const Matrix& p) { return spd::embed(p); }

// --- layer backward passes ---------------------------------------------------

struct BiMapGradients {
  Matrix input;   // dL/dP (symmetric)
  Matrix weight;  // Euclidean dL/dW
};

/// For Y = W^T P W and upstream G = dL/dY.
inline BiMapGradients spd_layer_backward(const BiMapLayer& layer, const Matrix& p, const Matrix& upstream) {
  const Matrix g = symmetrize(upstream);
  return {layer.weight * g * layer.weight.transpose(), 2.0 * p * layer.weight * g};
}

inline double reeig_derivative(double l, double eps) { return l > eps ? 1.0 : 0.0; }

/// dL/dP for X = U max(S, eps) U^T.
inline Matrix spd_layer_backward(const ReEigLayer& layer, const SymEig& eig, const Matrix& upstream) {
  const double eps = layer.epsilon;
  return spectral_backward(
      eig, upstream, [eps](double l) { return std::max(l, eps); },
      [eps](double l) { return reeig_derivative(l, eps); });
}

inline Matrix spd_layer_backward(const ReEigLayer& layer, const Matrix& p, const Matrix& upstream) {
  return spd_layer_backward(layer, sym_eig(p), upstream);
}

/// dL/dP for the matrix log, given dL/d(log P).
inline Matrix log_backward(const SymEig& eig, const Matrix& upstream) {
  return spectral_backward(
      eig, upstream, [](double l) { return std::log(l); }, [](double l) { return 1.0 / l; });
}

/// dL/dP for LogEig features vec_sym(log P), given dL/d(features).
inline Matrix logeig_backward(const SymEig& eig, const Vector& upstream) {
  return log_backward(eig, vec_sym_backward(upstream, static_cast<int>(eig.values.size())));
}

/// Riemannian gradient step on the Stiefel manifold: project G onto the
/// tangent space at W, step, and retract by sign-fixed QR.
inline BiMapLayer stiefel_update(const BiMapLayer& layer, const Matrix& euclidean_grad, double lr) {
  const Matrix& w = layer.weight;
  if (euclidean_grad.rows() != w.rows() || euclidean_grad.cols() != w.cols())
    throw Error(ErrorKind::shape, "stiefel_update: gradient shape does not match W");
  const Matrix riemannian = euclidean_grad - w * symmetrize(w.transpose() * euclidean_grad);
  return {qr_orthonormal(w - lr * riemannian)};
}

// --- model ---------------------------------------------------------------------

struct SPDNetModel {
  std::vector<BiMapLayer> bimaps;
  ReEigLayer reeig;
  SpdTerminal terminal = SpdTerminal::log_eig;
  Matrix base;  // terminal base point in the output space; unused for log_eig
  NetworkParams net;

  int input_size() const { return bimaps.empty() ? 0 : bimaps.front().in_size(); }
  int output_size() const { return bimaps.empty() ? 0 : bimaps.back().out_size(); }

  std::span<NetworkParams> networks() { return {&net, 1}; }
  std::span<const NetworkParams> networks() const { return {&net, 1}; }
};

inline BiMapLayer random_bimap(int in, int out, std::mt19937_64& rng) {
  if (out > in || out < 1) throw Error(ErrorKind::invalid_spec, "BiMap needs 1 <= p_out <= p_in");
  std::normal_distribution<double> normal;
  Matrix a(in, out);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return {qr_orthonormal(a)};
}

/// BiMap+ReEig stack through `dims` (e.g. {20, 16, 12, 8}), the chosen
/// terminal map, and a dense network on the d_out (d_out + 1) / 2 features.
inline SPDNetModel make_spdnet(const std::vector<int>& dims, SpdTerminal terminal, const std::vector<int>& hidden,
                               int outputs, std::uint64_t seed, double reeig_epsilon = 1e-4) {
  if (dims.size() < 2) throw Error(ErrorKind::invalid_spec, "SPDNet needs at least one BiMap layer (two dims)");
  if (!(reeig_epsilon > 0.0)) throw Error(ErrorKind::invalid_spec, "ReEig epsilon must be positive");
  std::mt19937_64 rng(seed);
  SPDNetModel m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) m.bimaps.push_back(random_bimap(dims[l], dims[l + 1], rng));
  m.reeig.epsilon = reeig_epsilon;
  m.terminal = terminal;
  m.base = Matrix::Identity(dims.back(), dims.back());
  m.net = init_network(make_widths(sym_feature_count(dims.back()), hidden, outputs), seed ^ 0x9e3779b97f4a7c15ULL);
  return m;
}

/// Everything the backward pass needs from one sample's forward pass.
struct SpdTrace {
  std::vector<Matrix> bimap_inputs;
  std::vector<SymEig> reeig_eigs;
  Matrix stack_output;
  SymEig terminal_eig;
  Vector features;
};

/// BiMap/ReEig stack only.
inline Matrix spd_stack_forward(const SPDNetModel& m, const Matrix& p, SpdTrace* trace = nullptr) {
  Matrix x = p;
  for (const auto& layer : m.bimaps) {
    if (trace) trace->bimap_inputs.push_back(x);
    const Matrix y = bimap_forward(layer, x);
    SymEig e = sym_eig(y);
    const double eps = m.reeig.epsilon;
    x = e.apply([eps](double l) { return std::max(l, eps); });
    if (trace) trace->reeig_eigs.push_back(std::move(e));
  }
  return x;
}

struct TerminalBase {
  Matrix inv_root;  // B^{-1/2}, tangent_affine
  Matrix log_base;  // log B, tangent_log_euclidean
};

inline TerminalBase make_terminal_base(SpdTerminal t, const Matrix& base) {
  TerminalBase tb;
  if (t == SpdTerminal::log_eig) return tb;
  const SymEig e = spd::checked_eig(base, "terminal base");
  if (t == SpdTerminal::tangent_affine) tb.inv_root = spd_inv_sqrt(e);
  if (t == SpdTerminal::tangent_log_euclidean) tb.log_base = spd_log_matrix(e);
  return tb;
}

inline Vector terminal_forward(SpdTerminal t, const TerminalBase& tb, const Matrix& x, SpdTrace* trace = nullptr) {
  const Matrix arg = t == SpdTerminal::tangent_affine ? Matrix(symmetrize(tb.inv_root * x * tb.inv_root)) : x;
  SymEig e = sym_eig(arg);
  require_spd(e, "terminal input");
  Matrix l = spd_log_matrix(e);
  if (t == SpdTerminal::tangent_log_euclidean) l -= tb.log_base;
  Vector f = vec_sym(l);
  if (trace) {
    trace->stack_output = x;
    trace->terminal_eig = std::move(e);
    trace->features = f;
  }
  return f;
}

/// Features fed to the dense network, one column per sample, using `base`
/// for the tangent terminals.
inline Matrix spd_features(const SPDNetModel& m, std::span<const Matrix> ps, const Matrix& base) {
  const TerminalBase tb = make_terminal_base(m.terminal, base);
  Matrix f(sym_feature_count(m.output_size()), static_cast<Eigen::Index>(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    try {
      f.col(static_cast<Eigen::Index>(i)) = terminal_forward(m.terminal, tb, spd_stack_forward(m, ps[i]));
    } catch (const Error& e) {
      rethrow_with_context(e, "sample " + std::to_string(i));
    }
  }
  return f;
}

inline std::vector<Matrix> matrices_of(std::span<const ManifoldPoint> xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.matrix());
  return out;
}

/// Frechet mean of the stack outputs (metric matching the terminal); the
/// base point used by tangent terminals.
inline Matrix stack_output_mean(const SPDNetModel& m, std::span<const Matrix> ps) {
  const SpdMetric metric = m.terminal == SpdTerminal::tangent_log_euclidean ? SpdMetric::log_euclidean : SpdMetric::affine;
  std::vector<ManifoldPoint> outs;
  outs.reserve(ps.size());
  for (const auto& p : ps) outs.push_back(ManifoldPoint::spd(spd_stack_forward(m, p)));
  return frechet_mean(outs, metric).matrix();
}

/// Freezes the base point of a tangent terminal at the mean of `ps`.
inline void freeze_base(SPDNetModel& m, std::span<const Matrix> ps) {
  if (m.terminal == SpdTerminal::log_eig) return;
  m.base = stack_output_mean(m, ps);
}

inline Matrix predict_matrices(const SPDNetModel& m, std::span<const Matrix> ps) {
  return forward_batch(m.net, spd_features(m, ps, m.base));
}

inline Matrix predict(const SPDNetModel& m, std::span<const ManifoldPoint> xs) {
  const auto ps = matrices_of(xs);
  return predict_matrices(m, ps);
}

struct SpdNetGradients {
  double loss = 0.0;
  NetworkGradients net;
  std::vector<Matrix> bimaps;  // Euclidean dL/dW per BiMap layer
  std::vector<Matrix> inputs;  // dL/dP per sample
};

/// Loss and exact gradients for a batch with the terminal base held at
/// `base`.
inline SpdNetGradients spdnet_gradients(const SPDNetModel& m, std::span<const Matrix> ps, const Targets& y, LossKind loss,
                                        const Matrix& base) {
  if (ps.empty()) throw Error(ErrorKind::shape, "spdnet_gradients: empty batch");
  const TerminalBase tb = make_terminal_base(m.terminal, base);
  std::vector<SpdTrace> traces(ps.size());
  Matrix features(sym_feature_count(m.output_size()), static_cast<Eigen::Index>(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    try {
      const Matrix x = spd_stack_forward(m, ps[i], &traces[i]);
      features.col(static_cast<Eigen::Index>(i)) = terminal_forward(m.terminal, tb, x, &traces[i]);
    } catch (const Error& e) {
      rethrow_with_context(e, "sample " + std::to_string(i));
    }
  }
  const ForwardTrace ft = forward_trace(m.net, features);
  const LossEval le = evaluate_loss(ft.output(), y, loss);
  BackwardPass bp = backward_from_output(m.net, ft, le.d_output);

  SpdNetGradients g{le.loss, std::move(bp.grads), {}, {}};
  for (const auto& layer : m.bimaps) g.bimaps.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
  // Samples are reduced in order for reproducibility.
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const SpdTrace& t = traces[i];
    Matrix grad = logeig_backward(t.terminal_eig, bp.input_grad.col(static_cast<Eigen::Index>(i)));
    if (m.terminal == SpdTerminal::tangent_affine) grad = tb.inv_root * grad * tb.inv_root;
    for (std::size_t l = m.bimaps.size(); l-- > 0;) {
      grad = spd_layer_backward(m.reeig, t.reeig_eigs[l], grad);
      BiMapGradients bg = spd_layer_backward(m.bimaps[l], t.bimap_inputs[l], grad);
      if (!grad.allFinite() || !bg.weight.allFinite())
        throw Error(ErrorKind::numeric, "non-finite gradient in SPD layer " + std::to_string(l) + " at sample " +
                                            std::to_string(i));
      g.bimaps[l] += bg.weight;
      grad = std::move(bg.input);
    }
    g.inputs.push_back(std::move(grad));
  }
  return g;
}

}  // namespace geodnn
