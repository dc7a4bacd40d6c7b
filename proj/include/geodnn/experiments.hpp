#pragma once

// Model families, the geodesic kNN baseline, repeated random splits and the
// empirical convergence-rate experiment.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "geodnn/synthdata.hpp"
#include "geodnn/training.hpp"

namespace geodnn {

// ---------------------------------------------------------------------------
// Small utilities

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::string fingerprint(const nlohmann::json& config) { return hex64(fnv1a64(config.dump())); }

/// splitmix64 finalizer; derives independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// fn(i) for i in [0, count) on up to `jobs` threads; results come back in
/// index order. The exception of the lowest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int jobs, F&& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, jobs));
  if (n_threads == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Summary {
  double mean = 0.0, sd = 0.0, se = 0.0;
};

/// Mean, sample SD (n - 1; zero for one value) and SD / sqrt(n).
inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  s.se = s.sd / std::sqrt(n);
  return s;
}

// ---------------------------------------------------------------------------
// kNN

struct KnnModel {
  std::vector<ManifoldPoint> points;
  Labels labels;
  int k = 1;
  SpdMetric metric = SpdMetric::affine;
};

inline const std::vector<int>& default_knn_grid() {
  static const std::vector<int> grid{1, 3, 5, 7, 9, 11, 15, 21};
  return grid;
}

/// Majority vote among the k geodesic-nearest training points; ties go to
/// the smallest summed distance, then the lowest label.
inline Labels knn_predict(const KnnModel& m, std::span<const ManifoldPoint> queries) {
  if (m.k < 1 || static_cast<std::size_t>(m.k) > m.points.size())
    throw Error(ErrorKind::invalid_spec, "kNN needs 1 <= k <= training size (k=" + std::to_string(m.k) + ", n=" +
                                             std::to_string(m.points.size()) + ")");
  const auto k = static_cast<std::size_t>(m.k);
  Labels out;
  out.reserve(queries.size());
  std::vector<std::pair<double, int>> d(m.points.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    try {
      for (std::size_t i = 0; i < m.points.size(); ++i)
        d[i] = {geodesic_distance(queries[q], m.points[i], m.metric), static_cast<int>(i)};
    } catch (const Error& e) {
      rethrow_with_context(e, "sample " + std::to_string(q));
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());
    std::map<int, std::pair<int, double>> votes;  // label -> (count, summed distance)
    for (std::size_t j = 0; j < k; ++j) {
      auto& v = votes[m.labels[static_cast<std::size_t>(d[j].second)]];
      v.first += 1;
      v.second += d[j].first;
    }
    int best = votes.begin()->first;
    for (const auto& [label, v] : votes) {
      const auto& b = votes[best];
      if (v.first > b.first || (v.first == b.first && v.second < b.second)) best = label;
    }
    out.push_back(best);
  }
  return out;
}

inline double label_accuracy(const Labels& predicted, const Labels& truth) {
  if (truth.empty()) throw Error(ErrorKind::invalid_spec, "cannot evaluate on an empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline double knn_baseline(const Dataset& train, const Dataset& test, int k, SpdMetric metric = SpdMetric::affine) {
  const auto* labels = std::get_if<Labels>(&train.targets);
  const auto* truth = std::get_if<Labels>(&test.targets);
  if (!labels || !truth) throw Error(ErrorKind::invalid_spec, "kNN needs class labels");
  const KnnModel m{train.inputs, *labels, k, metric};
  return label_accuracy(knn_predict(m, test.inputs), *truth);
}

/// Chooses k from `grid` by accuracy on a held-out slice of `train`
/// (smallest k on ties), then keeps all of `train` as the reference set.
inline KnnModel fit_knn(const Dataset& train, const std::vector<int>& grid, double validation_fraction,
                        std::uint64_t seed, SpdMetric metric = SpdMetric::affine) {
  const auto* labels = std::get_if<Labels>(&train.targets);
  if (!labels) throw Error(ErrorKind::invalid_spec, "kNN needs class labels");
  if (grid.empty()) throw Error(ErrorKind::invalid_spec, "kNN k grid is empty");
  KnnModel m{train.inputs, *labels, grid.front(), metric};
  const IndexSplit s = holdout_split(train.size(), validation_fraction, seed);
  if (s.held_out.empty() || grid.size() == 1) {
    m.k = std::min<int>(m.k, static_cast<int>(train.size()));
    return m;
  }
  const Dataset fit = train.subset(s.train), val = train.subset(s.held_out);
  double best = -1.0;
  for (int k : grid) {
    if (k < 1 || static_cast<std::size_t>(k) > fit.size()) continue;
    const double acc = knn_baseline(fit, val, k, metric);
    if (acc > best) {
      best = acc;
      m.k = k;
    }
  }
  return m;
}

inline double evaluate(const KnnModel& m, const Dataset& d, Metric metric) {
  if (metric != Metric::accuracy) throw Error(ErrorKind::invalid_spec, "kNN baseline reports accuracy only");
  const auto* truth = std::get_if<Labels>(&d.targets);
  if (!truth) throw Error(ErrorKind::invalid_spec, "kNN needs class labels");
  return label_accuracy(knn_predict(m, d.inputs), *truth);
}

// ---------------------------------------------------------------------------
// Model families

enum class Family { dnn, ednn, tdnn, idnn, knn, spdnet, spdnet_tdnn_affine, spdnet_tdnn_log };

inline const std::vector<std::pair<Family, std::string>>& family_names() {
  static const std::vector<std::pair<Family, std::string>> names{
      {Family::dnn, "dnn"},         {Family::ednn, "ednn"},
      {Family::tdnn, "tdnn"},       {Family::idnn, "idnn"},
      {Family::knn, "knn"},         {Family::spdnet, "spdnet"},
      {Family::spdnet_tdnn_affine, "spdnet-tdnn-affine"}, {Family::spdnet_tdnn_log, "spdnet-tdnn-log"}};
  return names;
}

inline std::string to_string(Family f) {
  for (const auto& [k, n] : family_names())
    if (k == f) return n;
  return "unknown";
}

inline std::optional<Family> parse_family(const std::string& s) {
  for (const auto& [k, n] : family_names())
    if (n == s) return k;
  return std::nullopt;
}

inline bool is_spdnet(Family f) {
  return f == Family::spdnet || f == Family::spdnet_tdnn_affine || f == Family::spdnet_tdnn_log;
}

enum class AtlasKind { two_pole, class_means };

struct AtlasSpec {
  AtlasKind kind = AtlasKind::two_pole;
  double radius = 1.9;
};

struct ModelSpec {
  Family family = Family::tdnn;
  std::vector<int> hidden{100, 100, 100, 100, 100};
  std::optional<AtlasSpec> atlas;            // iDNN; required on SPD
  SpdMetric metric = SpdMetric::affine;      // tDNN/iDNN charts and kNN distance on SPD
  std::vector<int> spd_dims;                 // SPDNet chain starting at the input size; empty = default
  double reeig_epsilon = 1e-4;
  std::vector<int> knn_grid = default_knn_grid();
  std::string label;                         // report name; defaults to the family name

  std::string name() const { return label.empty() ? to_string(family) : label; }
};

/// Family-manifold compatibility; returns an empty string when fine.
inline std::string family_problem(const ModelSpec& s, ManifoldKind m) {
  if (is_spdnet(s.family) && m != ManifoldKind::spd) return to_string(s.family) + " needs SPD inputs";
  if (s.family == Family::idnn && m == ManifoldKind::spd && !s.atlas)
    return "idnn on spd needs an atlas spec (atlas required)";
  if (s.family == Family::idnn && s.atlas && s.atlas->kind == AtlasKind::two_pole && m == ManifoldKind::spd)
    return "two-pole atlas does not apply to spd";
  if (s.atlas && !(s.atlas->radius > 0.0)) return "atlas radius must be positive";
  return {};
}

/// Default SPDNet chain: three BiMap layers, each shrinking by ~3/4.
inline std::vector<int> default_spd_dims(int d) {
  std::vector<int> dims{d};
  for (int l = 0; l < 3; ++l) dims.push_back(std::max(2, static_cast<int>(std::lround(dims.back() * 0.75))));
  return dims;
}

using FittedModel = std::variant<EDNNModel, TDNNModel, IDNNModel, SPDNetModel, KnnModel>;

struct FitResult {
  FittedModel model;
  History history;
};

namespace detail {

inline Embedding embedding_for(ManifoldKind m) {
  switch (m) {
    case ManifoldKind::sphere: return Embedding::inclusion;
    case ManifoldKind::preshape: return Embedding::veronese_whitney;
    case ManifoldKind::spd: return Embedding::matrix_log;
  }
  return Embedding::inclusion;
}

inline ManifoldPoint base_point(const std::vector<ManifoldPoint>& xs, SpdMetric metric) {
  try {
    return frechet_mean(xs, metric);
  } catch (const ConvergenceError& e) {
    return e.last_iterate();
  }
}

inline Atlas class_mean_atlas(const Dataset& train, const AtlasSpec& spec, SpdMetric metric) {
  const auto* labels = std::get_if<Labels>(&train.targets);
  if (!labels) throw Error(ErrorKind::invalid_spec, "class-means atlas needs class labels");
  std::vector<ManifoldPoint> bases;
  for (int c = 0; c < class_count(*labels); ++c) {
    std::vector<ManifoldPoint> members;
    for (std::size_t i = 0; i < labels->size(); ++i)
      if ((*labels)[i] == c) members.push_back(train.inputs[i]);
    if (!members.empty()) bases.push_back(base_point(members, metric));
  }
  return atlas_from_bases(bases, spec.radius, metric);
}

template <class Model>
FitResult fit_trained(const Model& init, const Dataset& train, const TrainConfig& cfg) {
  Trained<Model> t = train_erm(init, train, cfg);
  return {std::move(t.model), std::move(t.history)};
}

}  // namespace detail

/// Builds the family's model from the training data (base points, atlases)
/// and trains it. `seed` initializes the networks.
inline FitResult fit_family(const ModelSpec& spec, const Dataset& train, const TrainConfig& cfg, std::uint64_t seed) {
  if (train.size() == 0) throw Error(ErrorKind::invalid_spec, "empty training set");
  const ManifoldPoint& x0 = train.inputs.front();
  if (const std::string p = family_problem(spec, x0.kind()); !p.empty()) throw Error(ErrorKind::invalid_spec, p);
  const int outputs = output_width_for(train.targets);
  const int n = x0.ambient_size();
  switch (spec.family) {
    case Family::knn:
      return {fit_knn(train, spec.knn_grid, cfg.validation_fraction, cfg.seed, spec.metric), {}};
    case Family::dnn:
      return detail::fit_trained(make_ednn(x0.kind(), Embedding::ambient, n, spec.hidden, outputs, seed), train, cfg);
    case Family::ednn:
      return detail::fit_trained(
          make_ednn(x0.kind(), detail::embedding_for(x0.kind()), n, spec.hidden, outputs, seed), train, cfg);
    case Family::tdnn: {
      const Chart c = make_chart(detail::base_point(train.inputs, spec.metric), 1.9, 0, spec.metric);
      return detail::fit_trained(make_tdnn(c, spec.hidden, outputs, seed), train, cfg);
    }
    case Family::idnn: {
      const AtlasSpec a = spec.atlas.value_or(AtlasSpec{});
      Atlas atlas = a.kind == AtlasKind::two_pole ? two_pole_atlas(x0.kind(), n, a.radius)
                                                  : detail::class_mean_atlas(train, a, spec.metric);
      return detail::fit_trained(make_idnn(std::move(atlas), spec.hidden, outputs, seed), train, cfg);
    }
    case Family::spdnet:
    case Family::spdnet_tdnn_affine:
    case Family::spdnet_tdnn_log: {
      const SpdTerminal t = spec.family == Family::spdnet              ? SpdTerminal::log_eig
                            : spec.family == Family::spdnet_tdnn_affine ? SpdTerminal::tangent_affine
                                                                        : SpdTerminal::tangent_log_euclidean;
      std::vector<int> dims = spec.spd_dims.empty() ? default_spd_dims(n) : spec.spd_dims;
      if (dims.front() != n)
        throw Error(ErrorKind::invalid_spec, "spd_dims starts at " + std::to_string(dims.front()) + " but inputs are " +
                                                 std::to_string(n) + "x" + std::to_string(n));
      return detail::fit_trained(make_spdnet(dims, t, spec.hidden, outputs, seed, spec.reeig_epsilon), train, cfg);
    }
  }
  throw Error(ErrorKind::invalid_spec, "unknown family");
}

inline double evaluate(const FittedModel& m, const Dataset& d, Metric metric) {
  return std::visit([&](const auto& model) { return evaluate(model, d, metric); }, m);
}

// ---------------------------------------------------------------------------
// Repeated splits

struct SplitPlan {
  std::vector<int> train, test;
};

/// `splits` random 75/25 partitions, stratified by label when every class
/// has at least 4 members; otherwise unstratified with a warning.
inline std::vector<SplitPlan> make_splits(const Dataset& d, int splits, std::uint64_t seed,
                                          std::vector<std::string>* warnings = nullptr, double test_fraction = 0.25) {
  if (splits < 1) throw Error(ErrorKind::invalid_spec, "splits must be >= 1");
  std::vector<std::vector<int>> groups;
  bool stratified = false;
  if (const auto* labels = std::get_if<Labels>(&d.targets)) {
    groups.resize(static_cast<std::size_t>(class_count(*labels)));
    for (std::size_t i = 0; i < labels->size(); ++i) groups[static_cast<std::size_t>((*labels)[i])].push_back(static_cast<int>(i));
    stratified = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.empty() || g.size() >= 4; });
    if (!stratified && warnings) warnings->push_back("a class has fewer than 4 members; splits are not stratified");
  }
  if (!stratified) {
    groups.assign(1, {});
    for (std::size_t i = 0; i < d.size(); ++i) groups[0].push_back(static_cast<int>(i));
  }
  std::vector<SplitPlan> out;
  for (int s = 0; s < splits; ++s) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    SplitPlan p;
    for (auto g : groups) {
      if (g.empty()) continue;
      std::shuffle(g.begin(), g.end(), rng);
      auto t = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(g.size())));
      t = std::clamp<std::size_t>(t, g.size() > 1 ? 1 : 0, g.size() > 1 ? g.size() - 1 : 0);
      p.test.insert(p.test.end(), g.begin(), g.begin() + static_cast<long>(t));
      p.train.insert(p.train.end(), g.begin() + static_cast<long>(t), g.end());
    }
    std::sort(p.train.begin(), p.train.end());
    std::sort(p.test.begin(), p.test.end());
    if (p.train.empty() || p.test.empty()) throw Error(ErrorKind::invalid_spec, "dataset too small to split");
    out.push_back(std::move(p));
  }
  return out;
}

struct FamilyResult {
  std::string family;
  std::vector<double> values;  // per split, in split order
  Summary summary;
  std::vector<int> best_epochs;
  double seconds = 0.0;        // summed training+evaluation time over splits
};

struct MetricsReport {
  std::string experiment;
  Metric metric = Metric::accuracy;
  int splits = 0;
  std::string fingerprint;
  std::vector<FamilyResult> families;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  const FamilyResult& family(const std::string& name) const {
    for (const auto& f : families)
      if (f.family == name) return f;
    throw Error(ErrorKind::invalid_spec, "no family " + name + " in report");
  }

  nlohmann::json to_json() const {
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& f : families)
      fams.push_back({{"family", f.family},      {"values", f.values},     {"mean", f.summary.mean},
                      {"sd", f.summary.sd},      {"se", f.summary.se},     {"best_epochs", f.best_epochs},
                      {"seconds", f.seconds}});
    return {{"experiment", experiment}, {"metric", to_string(metric)}, {"splits", splits},
            {"fingerprint", fingerprint}, {"families", fams},         {"warnings", warnings},
            {"wall_seconds", wall_seconds}};
  }

  /// One row per (family, split). Timing is left out so reruns are
  /// byte-identical.
  std::string to_csv() const {
    std::ostringstream o;
    o << "# geodnn-metrics experiment=" << experiment << " fingerprint=" << fingerprint << "\n";
    o << "family,split,metric,value\n";
    for (const auto& f : families)
      for (std::size_t s = 0; s < f.values.size(); ++s)
        o << f.family << ',' << s << ',' << to_string(metric) << ',' << io::format_double(f.values[s]) << '\n';
    return o.str();
  }
};

struct SplitOutcome {
  std::vector<double> values;
  std::vector<int> best_epochs;
  std::vector<double> seconds;
};

namespace detail {

/// Shared driver: `split(s)` yields the (train, test) pair of split s.
template <class SplitFn>
MetricsReport run_splits(const std::vector<ModelSpec>& families, int splits, std::uint64_t seed, const TrainConfig& cfg,
                         int jobs, Metric metric, SplitFn&& split) {
  const auto t0 = std::chrono::steady_clock::now();
  if (families.empty()) throw Error(ErrorKind::invalid_spec, "no model families requested");
  if (splits < 1) throw Error(ErrorKind::invalid_spec, "splits must be >= 1");
  MetricsReport r;
  r.metric = metric;
  r.splits = splits;
  const auto outcomes = parallel_map<SplitOutcome>(static_cast<std::size_t>(splits), jobs, [&](std::size_t s) {
    const auto [train, test] = split(s);
    const std::uint64_t split_seed = mix_seed(seed, 0x1000 + s);
    TrainConfig c = cfg;
    c.seed = split_seed;
    SplitOutcome o;
    for (const auto& f : families) {
      const auto f0 = std::chrono::steady_clock::now();
      try {
        FitResult fit = fit_family(f, train, c, mix_seed(split_seed, fnv1a64(f.name())));
        o.values.push_back(evaluate(fit.model, test, metric));
        o.best_epochs.push_back(fit.history.best_epoch);
      } catch (const Error& e) {
        rethrow_with_context(e, "split " + std::to_string(s) + ", family " + f.name());
      }
      o.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - f0).count());
    }
    return o;
  });

  for (std::size_t k = 0; k < families.size(); ++k) {
    FamilyResult fr;
    fr.family = families[k].name();
    for (const auto& o : outcomes) {
      fr.values.push_back(o.values[k]);
      fr.best_epochs.push_back(o.best_epochs[k]);
      fr.seconds += o.seconds[k];
    }
    fr.summary = summarize(fr.values);
    r.families.push_back(std::move(fr));
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

/// Every family on every split. Split s trains with seed mix(seed, s);
/// network initialization also depends on the family name, so results do
/// not depend on the order families are listed in.
inline MetricsReport repeated_splits(const Dataset& data, const std::vector<ModelSpec>& families, int splits,
                                     std::uint64_t seed, const TrainConfig& cfg, int jobs = 1,
                                     const std::string& experiment = "classification",
                                     const std::string& fingerprint_hex = "") {
  data.validate();
  std::vector<std::string> warnings;
  const auto plans = make_splits(data, splits, seed, &warnings);
  MetricsReport r = detail::run_splits(
      families, splits, seed, cfg, jobs, is_classification(data.targets) ? Metric::accuracy : Metric::risk,
      [&](std::size_t s) { return std::pair{data.subset(plans[s].train), data.subset(plans[s].test)}; });
  r.experiment = experiment;
  r.fingerprint = fingerprint_hex;
  r.warnings = std::move(warnings);
  return r;
}

using DatasetFactory = std::function<Dataset(std::uint64_t seed)>;

inline std::uint64_t redraw_seed(std::uint64_t seed, std::size_t split) { return mix_seed(seed, 0x2000 + split); }

/// Variant where split s first draws a fresh dataset make(redraw_seed(seed, s))
/// and then takes one 75/25 split of it. Used when the generator itself is
/// random at the population level (mixture sub-centers), so the mean over
/// splits estimates the expected accuracy rather than that of one draw.
inline MetricsReport repeated_splits(const DatasetFactory& make, const std::vector<ModelSpec>& families, int splits,
                                     std::uint64_t seed, const TrainConfig& cfg, int jobs = 1,
                                     const std::string& experiment = "classification",
                                     const std::string& fingerprint_hex = "") {
  const Dataset probe = make(redraw_seed(seed, 0));
  const Metric metric = is_classification(probe.targets) ? Metric::accuracy : Metric::risk;
  std::mutex warn_mutex;
  std::vector<std::string> warnings;
  MetricsReport r = detail::run_splits(families, splits, seed, cfg, jobs, metric, [&](std::size_t s) {
    const Dataset d = s == 0 ? probe : make(redraw_seed(seed, s));
    d.validate();
    std::vector<std::string> w;
    const SplitPlan p = make_splits(d, 1, mix_seed(seed, s), &w).front();
    if (!w.empty()) {
      std::lock_guard lock(warn_mutex);
      if (warnings.empty()) warnings = w;
    }
    return std::pair{d.subset(p.train), d.subset(p.test)};
  });
  r.experiment = experiment;
  r.fingerprint = fingerprint_hex;
  r.warnings = std::move(warnings);
  return r;
}

// ---------------------------------------------------------------------------
// Convergence-rate experiment

struct RateSpec {
  RegressionFunction f0 = RegressionFunction::smooth;
  double constant = 1.0;
  double sigma = 0.1;
  int dimension = 2;
  std::vector<int> n_grid{500, 2000, 8000};
  int replications = 5;
  int test_size = 10000;
  std::uint64_t seed = 0;
  ModelSpec model = [] {
    ModelSpec m;
    m.family = Family::ednn;
    return m;
  }();
  TrainConfig train;

  void validate() const {
    if (n_grid.size() < 3) throw Error(ErrorKind::invalid_spec, "rate n grid needs at least 3 points");
    for (std::size_t i = 0; i < n_grid.size(); ++i)
      if (n_grid[i] < 2 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
        throw Error(ErrorKind::invalid_spec, "rate n grid must be increasing and >= 2");
    if (replications < 1) throw Error(ErrorKind::invalid_spec, "replications must be >= 1");
    if (test_size < 1) throw Error(ErrorKind::invalid_spec, "test_size must be >= 1");
    if (model.family == Family::knn || is_spdnet(model.family))
      throw Error(ErrorKind::invalid_spec, "rate experiment needs a regression network family");
    train.validate();
  }
};

struct RateRow {
  int n = 0;
  std::vector<double> risks;  // per replication
  Summary summary;
};

struct RateResult {
  std::vector<RateRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // slope not fitted
  bool strictly_decreasing = false;
  std::string fingerprint;

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
      rs.push_back({{"n", r.n}, {"risks", r.risks}, {"mean", r.summary.mean}, {"sd", r.summary.sd}});
    return {{"experiment", "rate-check"}, {"rows", rs},
            {"slope", degenerate ? nlohmann::json(nullptr) : nlohmann::json(slope)},
            {"degenerate", degenerate}, {"strictly_decreasing", strictly_decreasing}, {"fingerprint", fingerprint}};
  }

  std::string to_csv() const {
    std::ostringstream o;
    o << "# geodnn-rate fingerprint=" << fingerprint << "\n";
    o << "n,mean_risk,sd\n";
    for (const auto& r : rows)
      o << r.n << ',' << io::format_double(r.summary.mean) << ',' << io::format_double(r.summary.sd) << '\n';
    return o.str();
  }
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Held-out excess risk E(f_hat - f0)^2 on a fixed noiseless test set of
/// size test_size, averaged over fresh training draws at each n. The slope
/// fit is skipped (degenerate) when f0 is constant on the test set or some
/// mean risk is not positive.
inline RateResult rate_experiment(const RateSpec& spec, int jobs = 1) {
  spec.validate();
  RegressionSpec test_spec{spec.f0, spec.constant, 0.0, spec.dimension, spec.test_size, mix_seed(spec.seed, 0x7e57)};
  const Dataset test = gen_regression_sphere(test_spec);

  struct Job {
    std::size_t row;
    int rep;
  };
  std::vector<Job> jobs_list;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i)
    for (int r = 0; r < spec.replications; ++r) jobs_list.push_back({i, r});

  const auto risks = parallel_map<double>(jobs_list.size(), jobs, [&](std::size_t j) {
    const Job& job = jobs_list[j];
    const int n = spec.n_grid[job.row];
    const std::uint64_t s = mix_seed(mix_seed(spec.seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(job.rep));
    const Dataset train =
        gen_regression_sphere({spec.f0, spec.constant, spec.sigma, spec.dimension, n, s});
    TrainConfig c = spec.train;
    c.seed = s;
    try {
      const FitResult fit = fit_family(spec.model, train, c, mix_seed(s, 1));
      return evaluate(fit.model, test, Metric::risk);
    } catch (const Error& e) {
      rethrow_with_context(e, "n=" + std::to_string(n) + ", replication " + std::to_string(job.rep));
    }
  });

  RateResult out;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    RateRow row{spec.n_grid[i], {}, {}};
    for (std::size_t j = 0; j < jobs_list.size(); ++j)
      if (jobs_list[j].row == i) row.risks.push_back(risks[j]);
    row.summary = summarize(row.risks);
    out.rows.push_back(std::move(row));
  }
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    out.strictly_decreasing = out.strictly_decreasing && out.rows[i].summary.mean < out.rows[i - 1].summary.mean;

  const auto& ys = std::get<Values>(test.targets);
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double var = 0.0;
  for (double y : ys) var += (y - ybar) * (y - ybar);
  var /= static_cast<double>(ys.size());
  std::vector<double> xs, ms;
  bool positive = true;
  for (const auto& r : out.rows) {
    xs.push_back(r.n);
    ms.push_back(r.summary.mean);
    positive = positive && r.summary.mean > 0.0 && std::isfinite(r.summary.mean);
  }
  out.degenerate = var < 1e-12 || !positive;
  if (!out.degenerate) out.slope = loglog_slope(xs, ms);
  return out;
}

}  // namespace geodnn
