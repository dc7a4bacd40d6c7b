#pragma once

// Runs a parsed ExperimentConfig and writes its output directory:
//   metrics.json, metrics.csv   per-family results (rate.csv for rate-check)
//   provenance.json             canonical config, fingerprint, dataset provenance
//   dataset.csv                 when save_dataset is set

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "geodnn/config.hpp"

namespace geodnn {

/// Seed of the single dataset draw when the data are not redrawn per split.
inline std::uint64_t dataset_seed(const ExperimentConfig& c) { return mix_seed(c.seed, 0xda7a); }

inline Dataset make_dataset(const ExperimentConfig& c, std::uint64_t seed) {
  if (!c.data_file.empty()) {
    Dataset d = io::read_dataset_csv(c.data_file);
    if (d.inputs.empty() || d.inputs.front().kind() != manifold_of(c.kind))
      throw Error(ErrorKind::config, "data.file: " + c.data_file + " does not hold " +
                                         to_string(manifold_of(c.kind)) + " points");
    return d;
  }
  switch (c.kind) {
    case ExperimentKind::mixture_classify: {
      MixtureSpec m = c.mixture;
      m.seed = seed;
      return sample_mixture(m);
    }
    case ExperimentKind::shape_classify: {
      PlanarShapeSpec s;
      for (const auto& t : c.shape.templates)
        s.templates.push_back(
            ellipse_template(c.shape.landmarks, t.a, t.b, t.bump_height, t.bump_at, t.bump_width));
      s.sigma = c.shape.sigma;
      s.per_class = c.shape.per_class;
      s.rotation_range = c.shape.rotation_range;
      s.seed = seed;
      return gen_planar_shapes(s);
    }
    case ExperimentKind::spd_classify: {
      // Class bases depend on the experiment seed only, so redraws share them.
      SpdClassSpec s{random_spd_bases(c.spd.dimension, c.spd.classes, c.spd.separation, mix_seed(c.seed, 0xba5e)),
                     c.spd.spread, c.spd.per_class, seed};
      return gen_spd_dataset(s);
    }
    case ExperimentKind::rate_check: {
      const auto& r = c.rate;
      return gen_regression_sphere({r.f0, r.constant, r.sigma, r.dimension, r.n_grid.back(), seed});
    }
  }
  throw Error(ErrorKind::config, "unknown experiment");
}

struct RateOutcome {
  std::string model;
  RateResult result;
};

struct RunOutput {
  ExperimentConfig config;
  std::string fingerprint;
  std::optional<MetricsReport> report;  // classification experiments
  std::vector<RateOutcome> rates;       // rate-check, one per model
  nlohmann::json dataset_provenance;
  double wall_seconds = 0.0;

  /// Human-readable result lines, e.g. "tdnn 92.50±2.10 (10 splits)".
  std::vector<std::string> summary_lines() const {
    std::vector<std::string> out;
    char buf[256];
    if (report) {
      const bool acc = report->metric == Metric::accuracy;
      for (const auto& f : report->families) {
        const double scale = acc ? 100.0 : 1.0;
        std::snprintf(buf, sizeof buf, acc ? "%s %.2f±%.2f (%d splits)" : "%s %.4g±%.2g (%d splits)",
                      f.family.c_str(), scale * f.summary.mean, scale * f.summary.sd, report->splits);
        out.emplace_back(buf);
      }
      for (const auto& w : report->warnings) out.push_back("warning: " + w);
    }
    for (const auto& r : rates) {
      std::string line = r.model + " risk";
      for (const auto& row : r.result.rows) {
        std::snprintf(buf, sizeof buf, " n=%d:%.4g", row.n, row.summary.mean);
        line += buf;
      }
      if (r.result.degenerate) {
        line += " slope n/a (degenerate)";
      } else {
        std::snprintf(buf, sizeof buf, " slope %.3f", r.result.slope);
        line += buf;
      }
      line += r.result.strictly_decreasing ? " decreasing" : " not decreasing";
      out.push_back(line);
    }
    return out;
  }

  nlohmann::json metrics_json() const {
    if (report) return report->to_json();
    nlohmann::json models = nlohmann::json::array();
    for (const auto& r : rates) {
      nlohmann::json j = r.result.to_json();
      j["model"] = r.model;
      models.push_back(j);
    }
    return {{"experiment", "rate-check"}, {"fingerprint", fingerprint}, {"models", models},
            {"wall_seconds", wall_seconds}};
  }

  /// Deterministic: no timings, %.17g values.
  std::string metrics_csv() const {
    if (report) return report->to_csv();
    std::ostringstream o;
    o << "# geodnn-metrics experiment=rate-check fingerprint=" << fingerprint << "\n";
    o << "family,n,replication,risk\n";
    for (const auto& r : rates)
      for (const auto& row : r.result.rows)
        for (std::size_t k = 0; k < row.risks.size(); ++k)
          o << r.model << ',' << row.n << ',' << k << ',' << io::format_double(row.risks[k]) << '\n';
    return o.str();
  }
};

inline RunOutput run_experiment(const ExperimentConfig& c, int jobs = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.config = c;
  out.fingerprint = fingerprint(c);
  const std::string name = to_string(c.kind);

  if (c.kind == ExperimentKind::rate_check) {
    out.dataset_provenance = {{"generator", "regression-sphere"}, {"f0", to_string(c.rate.f0)},
                              {"sigma", c.rate.sigma},           {"dimension", c.rate.dimension},
                              {"test_size", c.rate.test_size},   {"seed", c.seed}};
    for (const auto& m : c.models) {
      RateSpec spec = c.rate;
      spec.seed = c.seed;
      spec.model = m;
      spec.train = c.train;
      RateResult r;
      try {
        r = rate_experiment(spec, jobs);
      } catch (const Error& e) {
        rethrow_with_context(e, "model " + m.name());
      }
      r.fingerprint = out.fingerprint;
      out.rates.push_back({m.name(), std::move(r)});
    }
  } else if (c.redraw_per_split && c.data_file.empty()) {
    const DatasetFactory make = [&c](std::uint64_t s) { return make_dataset(c, s); };
    out.dataset_provenance = make(redraw_seed(c.seed, 0)).provenance;
    out.dataset_provenance["redraw_per_split"] = true;
    out.report = repeated_splits(make, c.models, c.splits, c.seed, c.train, jobs, name, out.fingerprint);
  } else {
    const Dataset d = make_dataset(c, dataset_seed(c));
    out.dataset_provenance = d.provenance;
    out.report = repeated_splits(d, c.models, c.splits, c.seed, c.train, jobs, name, out.fingerprint);
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Creates `dir` and checks that a file can be written there.
inline void ensure_writable_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = std::filesystem::path(dir) / ".geodnn-write-test";
  std::ofstream f(probe);
  if (ec || !f) throw Error(ErrorKind::config, "output: cannot write to directory '" + dir + "'");
  f.close();
  std::filesystem::remove(probe, ec);
}

inline std::string default_output_dir(const ExperimentConfig& c) {
  return c.output.empty() ? "results/" + to_string(c.kind) : c.output;
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << text;
}

inline void write_outputs(const RunOutput& r, const std::string& dir, int jobs = 1) {
  ensure_writable_dir(dir);
  const auto path = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
  io::write_json(r.metrics_json(), path("metrics.json"));
  write_text(r.metrics_csv(), path("metrics.csv"));
  for (const auto& rate : r.rates) {
    // One model is the usual case; several get suffixed files.
    const std::string f = r.rates.size() == 1 ? "rate.csv" : "rate-" + rate.model + ".csv";
    write_text(rate.result.to_csv(), path(f.c_str()));
  }
  io::write_json({{"fingerprint", r.fingerprint},
                  {"config", to_json(r.config)},
                  {"dataset", r.dataset_provenance},
                  {"jobs", jobs},
                  {"wall_seconds", r.wall_seconds},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)}},
                 path("provenance.json"));
  if (r.config.save_dataset) {
    const std::uint64_t s = r.config.redraw_per_split ? redraw_seed(r.config.seed, 0) : dataset_seed(r.config);
    io::write_dataset_csv(make_dataset(r.config, s), path("dataset.csv"));
  }
}

}  // namespace geodnn
