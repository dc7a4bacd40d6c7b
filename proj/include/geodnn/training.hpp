#pragma once

// Minibatch Adam on the empirical loss, with an optional held-out slice of the
// training data for early-stopping snapshots and learning-rate selection.
//
// eDNN/tDNN/iDNN features are fixed, so each dataset is encoded once and
// minibatches are column selections of that encoding. SPDNet features move
// with the BiMap weights and are recomputed per batch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "geodnn/dataset.hpp"
#include "geodnn/models.hpp"
#include "geodnn/spdnet.hpp"

namespace geodnn {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double validation_fraction = 0.25;
  bool tune_learning_rate = false;
  std::vector<double> lr_grid{1e-2, 1e-3, 1e-4};
  int patience = 0;           // stop after this many epochs without a new best validation loss; 0 = never
  double stiefel_lr = 1e-2;   // BiMap step size (plain Riemannian gradient step)

  void validate() const {
    if (epochs < 0) throw Error(ErrorKind::invalid_spec, "epochs must be >= 0");
    if (batch_size < 1) throw Error(ErrorKind::invalid_spec, "batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::invalid_spec, "learning_rate must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw Error(ErrorKind::invalid_spec, "validation_fraction must lie in [0, 1)");
    if (tune_learning_rate && lr_grid.empty()) throw Error(ErrorKind::invalid_spec, "lr_grid is empty");
    for (double lr : lr_grid)
      if (!(lr > 0.0)) throw Error(ErrorKind::invalid_spec, "lr_grid entries must be positive");
    if (patience < 0) throw Error(ErrorKind::invalid_spec, "patience must be >= 0");
    if (!(stiefel_lr > 0.0)) throw Error(ErrorKind::invalid_spec, "stiefel_lr must be positive");
  }
};

struct History {
  std::vector<double> train_loss;           // mean minibatch loss per epoch
  std::vector<double> validation_loss;      // empty without a validation slice
  std::vector<double> validation_accuracy;  // classification only
  int best_epoch = -1;                  // -1: final parameters were returned
  double learning_rate = 0.0;
};

template <class Model>
struct Trained {
  Model model;
  History history;
};

inline LossKind loss_for(const Targets& t) {
  return is_classification(t) ? LossKind::cross_entropy : LossKind::squared_error;
}

inline int output_width_for(const Targets& t) {
  return is_classification(t) ? class_count(std::get<Labels>(t)) : 1;
}

/// Deterministic (train, validation) index split of 0..n-1.
struct IndexSplit {
  std::vector<int> train, held_out;
};

inline IndexSplit holdout_split(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto v = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (fraction > 0.0 && n >= 2) v = std::clamp<std::size_t>(v, 1, n - 1);
  else v = 0;
  IndexSplit s;
  s.held_out.assign(idx.begin(), idx.begin() + static_cast<long>(v));
  s.train.assign(idx.begin() + static_cast<long>(v), idx.end());
  std::sort(s.held_out.begin(), s.held_out.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

namespace detail {

inline void check_epoch_loss(double loss, int epoch) {
  if (!std::isfinite(loss))
    throw Error(ErrorKind::training_diverged, "training diverged at epoch " + std::to_string(epoch) + " (loss " +
                                                  std::to_string(loss) + ")");
}

/// Runs `step` inside an epoch and turns numeric failures into
/// training-diverged errors that carry the epoch.
template <class F>
void guarded(int epoch, F&& step) {
  try {
    step();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numeric) throw;
    throw Error(ErrorKind::training_diverged, "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
  }
}

inline std::vector<std::vector<int>> minibatches(std::vector<int>& order, int batch, std::mt19937_64& rng) {
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> out;
  for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(batch))
    out.emplace_back(order.begin() + static_cast<long>(s),
                     order.begin() + static_cast<long>(std::min(order.size(), s + static_cast<std::size_t>(batch))));
  return out;
}

/// Validation loss, plus accuracy for classification targets.
inline std::pair<double, double> validation_scores(const Matrix& out, const Targets& y, LossKind loss) {
  const double l = evaluate_loss(out, y, loss).loss;
  if (!is_classification(y)) return {l, std::numeric_limits<double>::quiet_NaN()};
  const auto& labels = std::get<Labels>(y);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::Index arg = 0;
    out.col(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
    hits += arg == labels[i];
  }
  return {l, static_cast<double>(hits) / static_cast<double>(labels.size())};
}

/// Shared epoch loop. `run_epoch(epoch, rng)` trains once over the data and
/// returns the mean train loss; `val_scores()` returns (loss, accuracy) of the
/// current model. The returned snapshot is the epoch with the lowest
/// validation loss.
template <class Model, class RunEpoch, class ValScores>
Trained<Model> epoch_loop(Model& model, const TrainConfig& cfg, bool has_val, RunEpoch&& run_epoch,
                          ValScores&& val_scores) {
  Trained<Model> out{model, {}};
  out.history.learning_rate = cfg.learning_rate;
  std::mt19937_64 rng(cfg.seed);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double tl = run_epoch(epoch, rng);
    check_epoch_loss(tl, epoch);
    out.history.train_loss.push_back(tl);
    if (!has_val) continue;
    const auto [vl, acc] = val_scores();
    out.history.validation_loss.push_back(vl);
    if (!std::isnan(acc)) out.history.validation_accuracy.push_back(acc);
    if (vl < best) {
      best = vl;
      out.model = model;
      out.history.best_epoch = epoch;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  if (!has_val || out.history.best_epoch < 0) out.model = model;
  return out;
}

}  // namespace detail

/// Trains an eDNN/tDNN/iDNN on pre-encoded features. `val` may be null.
template <class Model, class Enc>
Trained<Model> train_encoded(Model model, const Enc& enc, const Targets& y, const Enc* val_enc, const Targets* val_y,
                             const TrainConfig& cfg) {
  cfg.validate();
  const LossKind loss = loss_for(y);
  const auto n = target_count(y);
  if (n == 0) throw Error(ErrorKind::invalid_spec, "cannot train on an empty dataset");
  std::vector<AdamState> adam;
  for (const auto& net : model.networks()) adam.push_back(AdamState::for_params(net, {cfg.learning_rate}));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto run_epoch = [&](int epoch, std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& b : detail::minibatches(order, cfg.batch_size, rng)) {
      detail::guarded(epoch, [&] {
        const ModelGradients g = encoded_gradients(model, select_columns(enc, b), select_targets(y, b), loss);
        total += g.loss * static_cast<double>(b.size());
        auto nets = model.networks();
        for (std::size_t k = 0; k < nets.size(); ++k) adam_step(nets[k], g.nets[k], adam[k]);
      });
    }
    return total / static_cast<double>(n);
  };
  auto val_scores = [&] { return detail::validation_scores(predict_encoded(model, *val_enc), *val_y, loss); };
  return detail::epoch_loop(model, cfg, val_enc != nullptr, run_epoch, val_scores);
}

/// SPDNet training: Adam on the dense network, Stiefel steps on BiMaps.
/// Tangent terminals use the Frechet mean of each batch's stack outputs as
/// the base point (held fixed within the batch); the returned model has the
/// base frozen at the mean over all training inputs.
inline Trained<SPDNetModel> train_spdnet(SPDNetModel model, const std::vector<Matrix>& xs, const Targets& y,
                                         const std::vector<Matrix>* val_xs, const Targets* val_y,
                                         const TrainConfig& cfg) {
  cfg.validate();
  const LossKind loss = loss_for(y);
  const auto n = target_count(y);
  if (n == 0 || n != xs.size()) throw Error(ErrorKind::invalid_spec, "SPDNet training data is empty or mismatched");
  AdamState adam = AdamState::for_params(model.net, {cfg.learning_rate});
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto run_epoch = [&](int epoch, std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& b : detail::minibatches(order, cfg.batch_size, rng)) {
      detail::guarded(epoch, [&] {
        std::vector<Matrix> batch;
        batch.reserve(b.size());
        for (int i : b) batch.push_back(xs[static_cast<std::size_t>(i)]);
        const Matrix base = model.terminal == SpdTerminal::log_eig ? model.base : stack_output_mean(model, batch);
        const SpdNetGradients g = spdnet_gradients(model, batch, select_targets(y, b), loss, base);
        total += g.loss * static_cast<double>(b.size());
        adam_step(model.net, g.net, adam);
        for (std::size_t l = 0; l < model.bimaps.size(); ++l)
          model.bimaps[l] = stiefel_update(model.bimaps[l], g.bimaps[l], cfg.stiefel_lr);
      });
    }
    return total / static_cast<double>(n);
  };
  auto val_scores = [&] {
    freeze_base(model, xs);
    return detail::validation_scores(predict_matrices(model, *val_xs), *val_y, loss);
  };
  Trained<SPDNetModel> out = detail::epoch_loop(model, cfg, val_xs != nullptr, run_epoch, val_scores);
  freeze_base(out.model, xs);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset-level entry points

namespace detail {

template <class Model>
auto encode_dataset(const Model& m, const Dataset& d) {
  return encode(m, std::span<const ManifoldPoint>(d.inputs));
}

template <class Model>
Trained<Model> train_once(const Model& init, const Dataset& fit, const Dataset* val, const TrainConfig& cfg) {
  if constexpr (std::is_same_v<Model, SPDNetModel>) {
    const auto xs = matrices_of(fit.inputs);
    if (!val) return train_spdnet(init, xs, fit.targets, nullptr, nullptr, cfg);
    const auto vx = matrices_of(val->inputs);
    return train_spdnet(init, xs, fit.targets, &vx, &val->targets, cfg);
  } else {
    const auto enc = encode_dataset(init, fit);
    if (!val) return train_encoded(init, enc, fit.targets, decltype(&enc){nullptr}, nullptr, cfg);
    const auto venc = encode_dataset(init, *val);
    return train_encoded(init, enc, fit.targets, &venc, &val->targets, cfg);
  }
}

}  // namespace detail

/// ERM on `data`: holds out cfg.validation_fraction for snapshot selection
/// (and for choosing among cfg.lr_grid when tuning is on). The returned
/// model is the best-validation snapshot, or the final parameters when no
/// validation slice is held out.
template <class Model>
Trained<Model> train_erm(const Model& init, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw Error(ErrorKind::invalid_spec, "cannot train on an empty dataset");
  const IndexSplit s = holdout_split(data.size(), cfg.validation_fraction, cfg.seed);
  const bool has_val = !s.held_out.empty();
  const Dataset fit = has_val ? data.subset(s.train) : data;
  const Dataset val = has_val ? data.subset(s.held_out) : Dataset{};
  const Dataset* vp = has_val ? &val : nullptr;
  if (!cfg.tune_learning_rate || !has_val) return detail::train_once(init, fit, vp, cfg);

  std::optional<Trained<Model>> best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (double lr : cfg.lr_grid) {
    TrainConfig c = cfg;
    c.learning_rate = lr;
    Trained<Model> t = detail::train_once(init, fit, vp, c);
    const auto& h = t.history;
    double score = std::numeric_limits<double>::infinity();
    if (h.best_epoch >= 0) {
      const auto e = static_cast<std::size_t>(h.best_epoch);
      score = h.validation_loss[e];
    }
    if (!best || score < best_loss) {
      best_loss = score;
      best = std::move(t);
    }
  }
  return std::move(*best);
}

// ---------------------------------------------------------------------------

enum class Metric { accuracy, risk };

inline std::string to_string(Metric m) { return m == Metric::accuracy ? "accuracy" : "risk"; }

/// Accuracy: fraction of argmax predictions equal to the label.
/// Risk: mean squared error of the first output against the targets.
inline double score_outputs(const Matrix& out, const Targets& y, Metric metric) {
  const auto n = target_count(y);
  if (n == 0) throw Error(ErrorKind::invalid_spec, "cannot evaluate on an empty dataset");
  if (static_cast<std::size_t>(out.cols()) != n) throw Error(ErrorKind::shape, "prediction/target count mismatch");
  if (metric == Metric::accuracy) {
    const auto* labels = std::get_if<Labels>(&y);
    if (!labels) throw Error(ErrorKind::invalid_spec, "accuracy needs class labels");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      out.col(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
      hits += arg == (*labels)[i];
    }
    return static_cast<double>(hits) / static_cast<double>(n);
  }
  const auto* values = std::get_if<Values>(&y);
  if (!values) throw Error(ErrorKind::invalid_spec, "risk needs real-valued targets");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = out(0, static_cast<Eigen::Index>(i)) - (*values)[i];
    s += r * r;
  }
  return s / static_cast<double>(n);
}

template <class Model>
double evaluate(const Model& m, const Dataset& d, Metric metric) {
  return score_outputs(predict(m, std::span<const ManifoldPoint>(d.inputs)), d.targets, metric);
}

}  // namespace geodnn
