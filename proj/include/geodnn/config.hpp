#pragma once

// Experiment configuration: a YAML document (JSON is valid YAML, so JSON
// files are accepted as-is). Parsing never throws on bad content; it
// collects every violation with the path of the offending field, e.g.
// "data.kappa2: must be >= 0". Schema in configs/README.md.

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "geodnn/experiments.hpp"

namespace geodnn {

enum class ExperimentKind { mixture_classify, shape_classify, spd_classify, rate_check };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::mixture_classify: return "mixture-classify";
    case ExperimentKind::shape_classify: return "shape-classify";
    case ExperimentKind::spd_classify: return "spd-classify";
    case ExperimentKind::rate_check: return "rate-check";
  }
  return "unknown";
}

inline ManifoldKind manifold_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::shape_classify: return ManifoldKind::preshape;
    case ExperimentKind::spd_classify: return ManifoldKind::spd;
    default: return ManifoldKind::sphere;
  }
}

struct TemplateSpec {
  double a = 1.0, b = 1.0;
  double bump_height = 0.0, bump_at = 0.0, bump_width = 0.4;
};

struct ShapeDataSpec {
  int landmarks = 20;
  std::vector<TemplateSpec> templates{{1.6, 1.0}, {1.6, 1.0, 0.3, 0.0}};
  double sigma = 0.05;
  int per_class = 100;
  double rotation_range = std::numbers::pi;
};

struct SpdDataSpec {
  int dimension = 20;
  int classes = 3;
  double separation = 0.5;  // entry scale of the log of each class base
  double spread = 0.1;
  int per_class = 100;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::mixture_classify;
  std::uint64_t seed = 0;
  int splits = 10;
  std::string output;  // empty: results/<experiment>
  bool save_dataset = false;
  std::string data_file;  // geodnn dataset CSV instead of a generator
  MixtureSpec mixture;
  bool redraw_per_split = false;
  ShapeDataSpec shape;
  SpdDataSpec spd;
  RateSpec rate;  // data fields only; model/train come from `models`/`training`
  std::vector<ModelSpec> models;
  TrainConfig train;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> violations;

  bool ok() const { return config.has_value() && violations.empty(); }
};

// ---------------------------------------------------------------------------

namespace detail {

class Reader {
 public:
  std::vector<std::string> violations;

  void fail(const std::string& path, const std::string& msg) { violations.push_back(path + ": " + msg); }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  /// Flags keys of `node` outside `allowed`.
  void known_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) return;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(join(path, key), "unknown key");
    }
  }

  bool is_map(const YAML::Node& n, const std::string& path) {
    if (n.IsMap()) return true;
    fail(path, "expected a mapping");
    return false;
  }

  /// Reads node[key] into `out` when present; a wrong type is a violation.
  template <class T>
  bool get(const YAML::Node& node, const std::string& key, const std::string& path, T& out) {
    const YAML::Node v = node[key];
    if (!v) return false;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        out = v.as<bool>();
      } else {
        if (!v.IsScalar()) throw YAML::Exception(v.Mark(), "not a scalar");
        out = v.as<T>();
      }
      return true;
    } catch (const YAML::Exception&) {
      fail(join(path, key), std::string("expected ") + type_name<T>());
      return false;
    }
  }

  template <class T>
  bool get_list(const YAML::Node& node, const std::string& key, const std::string& path, std::vector<T>& out) {
    const YAML::Node v = node[key];
    if (!v) return false;
    if (!v.IsSequence()) {
      fail(join(path, key), std::string("expected a list of ") + type_name<T>());
      return false;
    }
    std::vector<T> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        tmp.push_back(v[i].as<T>());
      } catch (const YAML::Exception&) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", std::string("expected ") + type_name<T>());
        return false;
      }
    }
    out = std::move(tmp);
    return true;
  }

  void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }
};

inline void read_mixture(Reader& r, const YAML::Node& d, ExperimentConfig& c) {
  r.known_keys(d, "data", {"file", "dimension", "classes", "kappa1", "kappa2", "subcenters", "per_class", "centers",
                           "redraw_per_split"});
  auto& m = c.mixture;
  r.get(d, "dimension", "data", m.dimension);
  r.get(d, "classes", "data", m.classes);
  r.get(d, "kappa1", "data", m.kappa1);
  r.get(d, "kappa2", "data", m.kappa2);
  r.get(d, "subcenters", "data", m.subcenters);
  r.get(d, "per_class", "data", m.per_class);
  r.get(d, "redraw_per_split", "data", c.redraw_per_split);
  r.check(m.dimension >= 1, "data.dimension", "must be >= 1");
  r.check(m.classes >= 2, "data.classes", "must be >= 2");
  r.check(m.kappa1 >= 0.0, "data.kappa1", "must be >= 0");
  r.check(m.kappa2 >= 0.0, "data.kappa2", "must be >= 0");
  r.check(m.subcenters >= 1, "data.subcenters", "must be >= 1");
  r.check(m.per_class >= 1, "data.per_class", "must be >= 1");
  if (const YAML::Node cs = d["centers"]) {
    if (!cs.IsSequence()) {
      r.fail("data.centers", "expected a list of vectors");
    } else {
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string p = "data.centers[" + std::to_string(i) + "]";
        std::vector<double> v;
        try {
          v = cs[i].as<std::vector<double>>();
        } catch (const YAML::Exception&) {
          r.fail(p, "expected a list of numbers");
          continue;
        }
        Vector mu = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        if (mu.size() != m.dimension + 1) r.fail(p, "needs " + std::to_string(m.dimension + 1) + " entries");
        else if (std::abs(mu.norm() - 1.0) > 1e-10) r.fail(p, "must be a unit vector");
        else m.centers.push_back(mu);
      }
      r.check(cs.size() == static_cast<std::size_t>(m.classes), "data.centers", "needs one center per class");
    }
  } else {
    r.check(m.classes <= m.dimension + 1, "data.classes",
            "default (coordinate axis) centers need classes <= dimension + 1");
  }
}

inline void read_shapes(Reader& r, const YAML::Node& d, ExperimentConfig& c) {
  r.known_keys(d, "data", {"file", "landmarks", "templates", "sigma", "per_class", "rotation_range"});
  auto& s = c.shape;
  r.get(d, "landmarks", "data", s.landmarks);
  r.get(d, "sigma", "data", s.sigma);
  r.get(d, "per_class", "data", s.per_class);
  r.get(d, "rotation_range", "data", s.rotation_range);
  r.check(s.landmarks >= 3, "data.landmarks", "must be >= 3");
  r.check(s.sigma >= 0.0, "data.sigma", "must be >= 0");
  r.check(s.per_class >= 1, "data.per_class", "must be >= 1");
  r.check(s.rotation_range >= 0.0, "data.rotation_range", "must be >= 0");
  if (const YAML::Node ts = d["templates"]) {
    if (!ts.IsSequence()) {
      r.fail("data.templates", "expected a list of templates");
      return;
    }
    s.templates.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string p = "data.templates[" + std::to_string(i) + "]";
      if (!r.is_map(ts[i], p)) continue;
      r.known_keys(ts[i], p, {"a", "b", "bump_height", "bump_at", "bump_width"});
      TemplateSpec t;
      r.get(ts[i], "a", p, t.a);
      r.get(ts[i], "b", p, t.b);
      r.get(ts[i], "bump_height", p, t.bump_height);
      r.get(ts[i], "bump_at", p, t.bump_at);
      r.get(ts[i], "bump_width", p, t.bump_width);
      r.check(t.a > 0.0, p + ".a", "must be positive");
      r.check(t.b > 0.0, p + ".b", "must be positive");
      r.check(t.bump_width > 0.0, p + ".bump_width", "must be positive");
      r.check(t.bump_height > -1.0, p + ".bump_height", "must be > -1");
      s.templates.push_back(t);
    }
  }
  r.check(s.templates.size() >= 2, "data.templates", "needs at least two templates (one per class)");
}

inline void read_spd(Reader& r, const YAML::Node& d, ExperimentConfig& c) {
  r.known_keys(d, "data", {"file", "dimension", "classes", "separation", "spread", "per_class"});
  auto& s = c.spd;
  r.get(d, "dimension", "data", s.dimension);
  r.get(d, "classes", "data", s.classes);
  r.get(d, "separation", "data", s.separation);
  r.get(d, "spread", "data", s.spread);
  r.get(d, "per_class", "data", s.per_class);
  r.check(s.dimension >= 2, "data.dimension", "must be >= 2");
  r.check(s.classes >= 2, "data.classes", "must be >= 2");
  r.check(s.separation > 0.0, "data.separation", "must be positive");
  r.check(s.spread >= 0.0, "data.spread", "must be >= 0");
  r.check(s.per_class >= 1, "data.per_class", "must be >= 1");
}

inline void read_rate(Reader& r, const YAML::Node& d, ExperimentConfig& c) {
  r.known_keys(d, "data", {"f0", "constant", "sigma", "dimension", "n_grid", "replications", "test_size"});
  auto& s = c.rate;
  std::string f0 = to_string(s.f0);
  r.get(d, "f0", "data", f0);
  if (f0 == "smooth") s.f0 = RegressionFunction::smooth;
  else if (f0 == "constant") s.f0 = RegressionFunction::constant;
  else r.fail("data.f0", "unknown function '" + f0 + "' (smooth | constant)");
  r.get(d, "constant", "data", s.constant);
  r.get(d, "sigma", "data", s.sigma);
  r.get(d, "dimension", "data", s.dimension);
  r.get_list(d, "n_grid", "data", s.n_grid);
  r.get(d, "replications", "data", s.replications);
  r.get(d, "test_size", "data", s.test_size);
  r.check(s.sigma >= 0.0, "data.sigma", "must be >= 0");
  r.check(s.dimension >= 2, "data.dimension", "must be >= 2");
  r.check(s.n_grid.size() >= 3, "data.n_grid", "needs at least 3 sample sizes");
  for (std::size_t i = 0; i < s.n_grid.size(); ++i)
    r.check(s.n_grid[i] >= 2 && (i == 0 || s.n_grid[i] > s.n_grid[i - 1]), "data.n_grid[" + std::to_string(i) + "]",
            "sample sizes must be >= 2 and strictly increasing");
  r.check(s.replications >= 1, "data.replications", "must be >= 1");
  r.check(s.test_size >= 1, "data.test_size", "must be >= 1");
}

inline std::optional<ModelSpec> read_model(Reader& r, const YAML::Node& n, const std::string& p) {
  ModelSpec m;
  std::string family;
  if (n.IsScalar()) {
    family = n.as<std::string>();
  } else if (n.IsMap()) {
    r.known_keys(n, p, {"family", "hidden", "atlas", "metric", "spd_dims", "reeig_epsilon", "knn_grid", "label"});
    if (!r.get(n, "family", p, family)) {
      r.fail(p + ".family", "missing");
      return std::nullopt;
    }
  } else {
    r.fail(p, "expected a family name or a mapping");
    return std::nullopt;
  }
  const auto f = parse_family(family);
  if (!f) {
    std::string known;
    for (const auto& [k, name] : family_names()) known += (known.empty() ? "" : " | ") + name;
    r.fail(p + ".family", "unknown family '" + family + "' (" + known + ")");
    return std::nullopt;
  }
  m.family = *f;
  if (!n.IsMap()) return m;

  r.get_list(n, "hidden", p, m.hidden);
  for (std::size_t i = 0; i < m.hidden.size(); ++i)
    r.check(m.hidden[i] >= 1, p + ".hidden[" + std::to_string(i) + "]", "widths must be >= 1");
  std::string metric = "affine";
  if (r.get(n, "metric", p, metric)) {
    if (metric == "affine") m.metric = SpdMetric::affine;
    else if (metric == "log-euclidean") m.metric = SpdMetric::log_euclidean;
    else r.fail(p + ".metric", "unknown metric '" + metric + "' (affine | log-euclidean)");
  }
  if (const YAML::Node a = n["atlas"]) {
    if (r.is_map(a, p + ".atlas")) {
      r.known_keys(a, p + ".atlas", {"kind", "radius"});
      AtlasSpec spec;
      std::string kind = "two-pole";
      r.get(a, "kind", p + ".atlas", kind);
      if (kind == "two-pole") spec.kind = AtlasKind::two_pole;
      else if (kind == "class-means") spec.kind = AtlasKind::class_means;
      else r.fail(p + ".atlas.kind", "unknown atlas '" + kind + "' (two-pole | class-means)");
      r.get(a, "radius", p + ".atlas", spec.radius);
      r.check(spec.radius > 0.0, p + ".atlas.radius", "must be positive");
      m.atlas = spec;
    }
  }
  r.get_list(n, "spd_dims", p, m.spd_dims);
  for (std::size_t i = 0; i < m.spd_dims.size(); ++i)
    r.check(m.spd_dims[i] >= 1 && (i == 0 || m.spd_dims[i] <= m.spd_dims[i - 1]),
            p + ".spd_dims[" + std::to_string(i) + "]", "dimensions must be >= 1 and non-increasing");
  if (!m.spd_dims.empty()) r.check(m.spd_dims.size() >= 2, p + ".spd_dims", "needs the input size and at least one BiMap output");
  r.get(n, "reeig_epsilon", p, m.reeig_epsilon);
  r.check(m.reeig_epsilon > 0.0, p + ".reeig_epsilon", "must be positive");
  r.get_list(n, "knn_grid", p, m.knn_grid);
  r.check(!m.knn_grid.empty(), p + ".knn_grid", "must not be empty");
  for (std::size_t i = 0; i < m.knn_grid.size(); ++i)
    r.check(m.knn_grid[i] >= 1, p + ".knn_grid[" + std::to_string(i) + "]", "k must be >= 1");
  r.get(n, "label", p, m.label);
  return m;
}

inline void read_training(Reader& r, const YAML::Node& t, TrainConfig& c) {
  r.known_keys(t, "training", {"epochs", "batch_size", "learning_rate", "validation_fraction", "tune_learning_rate",
                               "lr_grid", "patience", "stiefel_lr"});
  r.get(t, "epochs", "training", c.epochs);
  r.get(t, "batch_size", "training", c.batch_size);
  r.get(t, "learning_rate", "training", c.learning_rate);
  r.get(t, "validation_fraction", "training", c.validation_fraction);
  r.get(t, "tune_learning_rate", "training", c.tune_learning_rate);
  r.get_list(t, "lr_grid", "training", c.lr_grid);
  r.get(t, "patience", "training", c.patience);
  r.get(t, "stiefel_lr", "training", c.stiefel_lr);
  r.check(c.epochs >= 0, "training.epochs", "must be >= 0");
  r.check(c.batch_size >= 1, "training.batch_size", "must be >= 1");
  r.check(c.learning_rate > 0.0, "training.learning_rate", "must be positive");
  r.check(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0, "training.validation_fraction",
          "must lie in [0, 1)");
  r.check(!c.tune_learning_rate || !c.lr_grid.empty(), "training.lr_grid", "must not be empty when tuning");
  for (std::size_t i = 0; i < c.lr_grid.size(); ++i)
    r.check(c.lr_grid[i] > 0.0, "training.lr_grid[" + std::to_string(i) + "]", "must be positive");
  r.check(c.patience >= 0, "training.patience", "must be >= 0");
  r.check(c.stiefel_lr > 0.0, "training.stiefel_lr", "must be positive");
}

/// Cross-field checks between data and model families.
inline void check_models(Reader& r, const ExperimentConfig& c) {
  const ManifoldKind manifold = manifold_of(c.kind);
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const ModelSpec& m = c.models[i];
    const std::string p = "models[" + std::to_string(i) + "]";
    if (!names.insert(m.name()).second) r.fail(p, "duplicate family/label '" + m.name() + "'; set a distinct label");
    if (m.family == Family::idnn && manifold == ManifoldKind::spd && !m.atlas) {
      r.fail(p + ".atlas", "idnn on spd needs an atlas spec (atlas required)");
    } else if (const std::string problem = family_problem(m, manifold); !problem.empty()) {
      r.fail(p + ".family", problem);
    }
    if (c.kind == ExperimentKind::rate_check && (m.family == Family::knn || is_spdnet(m.family)))
      r.fail(p + ".family", "rate-check needs a regression network family (dnn | ednn | tdnn | idnn)");
    if (m.atlas && m.atlas->kind == AtlasKind::class_means && c.kind == ExperimentKind::rate_check)
      r.fail(p + ".atlas.kind", "class-means atlas needs class labels");
    if (is_spdnet(m.family) && !m.spd_dims.empty() && c.data_file.empty() && m.spd_dims.front() != c.spd.dimension)
      r.fail(p + ".spd_dims[0]", "must equal data.dimension (" + std::to_string(c.spd.dimension) + ")");
  }
}

}  // namespace detail

inline ParseResult parse_config(const YAML::Node& root) {
  detail::Reader r;
  ParseResult out;
  if (!root.IsMap()) {
    out.violations.push_back("(root): expected a mapping");
    return out;
  }
  r.known_keys(root, "", {"experiment", "seed", "splits", "output", "save_dataset", "data", "models", "training"});
  ExperimentConfig c;

  std::string kind;
  if (!r.get(root, "experiment", "", kind)) {
    r.fail("experiment", "missing (mixture-classify | shape-classify | spd-classify | rate-check)");
  } else if (kind == "mixture-classify") c.kind = ExperimentKind::mixture_classify;
  else if (kind == "shape-classify") c.kind = ExperimentKind::shape_classify;
  else if (kind == "spd-classify") c.kind = ExperimentKind::spd_classify;
  else if (kind == "rate-check") c.kind = ExperimentKind::rate_check;
  else r.fail("experiment", "unknown experiment '" + kind + "'");

  long long seed = 0;
  if (r.get(root, "seed", "", seed)) {
    r.check(seed >= 0, "seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  r.get(root, "splits", "", c.splits);
  r.check(c.splits >= 1, "splits", "must be >= 1");
  r.get(root, "output", "", c.output);
  r.get(root, "save_dataset", "", c.save_dataset);

  const YAML::Node data = root["data"];
  if (data && r.is_map(data, "data")) {
    r.get(data, "file", "data", c.data_file);
    if (!c.data_file.empty() && c.kind == ExperimentKind::rate_check)
      r.fail("data.file", "rate-check generates its own data");
    switch (c.kind) {
      case ExperimentKind::mixture_classify: detail::read_mixture(r, data, c); break;
      case ExperimentKind::shape_classify: detail::read_shapes(r, data, c); break;
      case ExperimentKind::spd_classify: detail::read_spd(r, data, c); break;
      case ExperimentKind::rate_check: detail::read_rate(r, data, c); break;
    }
  }

  const YAML::Node models = root["models"];
  if (!models) {
    r.fail("models", "at least one model family is required");
  } else if (!models.IsSequence() || models.size() == 0) {
    r.fail("models", "expected a non-empty list");
  } else {
    for (std::size_t i = 0; i < models.size(); ++i)
      if (auto m = detail::read_model(r, models[i], "models[" + std::to_string(i) + "]")) c.models.push_back(*m);
  }

  if (const YAML::Node t = root["training"]; t && r.is_map(t, "training")) detail::read_training(r, t, c.train);
  if (r.violations.empty()) detail::check_models(r, c);

  out.violations = std::move(r.violations);
  if (out.violations.empty()) out.config = std::move(c);
  return out;
}

inline ParseResult parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  try {
    return parse_config(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    ParseResult r;
    r.violations.push_back(origin + ": parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    return r;
  }
}

inline ParseResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.violations.push_back(path + ": cannot read file");
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Canonical form: every effective value, used for fingerprints and the
// provenance sidecar. The output directory is deliberately excluded.

inline nlohmann::json to_json(const ModelSpec& m) {
  nlohmann::json j{{"family", to_string(m.family)},
                   {"label", m.name()},
                   {"hidden", m.hidden},
                   {"metric", m.metric == SpdMetric::affine ? "affine" : "log-euclidean"},
                   {"spd_dims", m.spd_dims},
                   {"reeig_epsilon", m.reeig_epsilon},
                   {"knn_grid", m.knn_grid}};
  if (m.atlas)
    j["atlas"] = {{"kind", m.atlas->kind == AtlasKind::two_pole ? "two-pole" : "class-means"},
                  {"radius", m.atlas->radius}};
  return j;
}

inline nlohmann::json to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"validation_fraction", t.validation_fraction},
          {"tune_learning_rate", t.tune_learning_rate},
          {"lr_grid", t.lr_grid},
          {"patience", t.patience},
          {"stiefel_lr", t.stiefel_lr}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json data;
  if (!c.data_file.empty()) {
    data = {{"file", c.data_file}};
  } else {
    switch (c.kind) {
      case ExperimentKind::mixture_classify:
        data = to_json(c.mixture);
        data.erase("seed");
        data.erase("generator");
        data["redraw_per_split"] = c.redraw_per_split;
        break;
      case ExperimentKind::shape_classify: {
        nlohmann::json ts = nlohmann::json::array();
        for (const auto& t : c.shape.templates)
          ts.push_back({{"a", t.a}, {"b", t.b}, {"bump_height", t.bump_height}, {"bump_at", t.bump_at},
                        {"bump_width", t.bump_width}});
        data = {{"landmarks", c.shape.landmarks}, {"templates", ts},           {"sigma", c.shape.sigma},
                {"per_class", c.shape.per_class}, {"rotation_range", c.shape.rotation_range}};
        break;
      }
      case ExperimentKind::spd_classify:
        data = {{"dimension", c.spd.dimension}, {"classes", c.spd.classes}, {"separation", c.spd.separation},
                {"spread", c.spd.spread},       {"per_class", c.spd.per_class}};
        break;
      case ExperimentKind::rate_check:
        data = {{"f0", to_string(c.rate.f0)},         {"constant", c.rate.constant},
                {"sigma", c.rate.sigma},              {"dimension", c.rate.dimension},
                {"n_grid", c.rate.n_grid},            {"replications", c.rate.replications},
                {"test_size", c.rate.test_size}};
        break;
    }
  }
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.models) models.push_back(to_json(m));
  return {{"experiment", to_string(c.kind)}, {"seed", c.seed},    {"splits", c.splits},
          {"data", data},                     {"models", models}, {"training", to_json(c.train)}};
}

inline std::string fingerprint(const ExperimentConfig& c) { return fingerprint(to_json(c)); }

}  // namespace geodnn
