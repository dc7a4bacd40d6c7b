// geodnn command line: run / validate / generate / rate-check.
//
// Exit codes: 0 ok, 2 config or usage error, 3 runtime failure,
// 4 geometric failure (off-manifold input, cut locus, uncovered point, ...).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "geodnn/runner.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;
constexpr int kGeometricError = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o, bool outputs) {
  cmd->add_option("config_file,--config,-c", o.config, "experiment config (YAML or JSON)")->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  if (outputs) {
    cmd->add_option("--out,-o", o.out, "output directory (default: config output or results/<experiment>)");
    cmd->add_option("--jobs,-j", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet,-q", o.quiet, "print nothing on success");
  }
}

geodnn::ExperimentConfig load_or_exit(const Options& o, int& code) {
  const auto parsed = geodnn::load_config(o.config);
  if (!parsed.ok()) {
    for (const auto& v : parsed.violations) std::cerr << "config error: " << v << '\n';
    code = kConfigError;
    return {};
  }
  geodnn::ExperimentConfig c = *parsed.config;
  if (o.seed) c.seed = *o.seed;
  code = 0;
  return c;
}

int run(const Options& o, bool require_rate) {
  int code = 0;
  const auto c = load_or_exit(o, code);
  if (code) return code;
  if (require_rate && c.kind != geodnn::ExperimentKind::rate_check) {
    std::cerr << "config error: experiment: rate-check needs experiment: rate-check, got "
              << geodnn::to_string(c.kind) << '\n';
    return kConfigError;
  }
  const std::string dir = o.out.empty() ? geodnn::default_output_dir(c) : o.out;
  geodnn::ensure_writable_dir(dir);
  const auto result = geodnn::run_experiment(c, o.jobs);
  geodnn::write_outputs(result, dir, o.jobs);
  if (!o.quiet) {
    for (const auto& line : result.summary_lines()) std::cout << line << '\n';
    std::cout << "wrote " << dir << " (fingerprint " << result.fingerprint << ")\n";
  }
  return 0;
}

int validate(const Options& o) {
  int code = 0;
  const auto c = load_or_exit(o, code);
  if (code) return code;
  std::cout << "ok: " << geodnn::to_string(c.kind) << ", " << c.models.size() << " model(s), fingerprint "
            << geodnn::fingerprint(c) << '\n';
  return 0;
}

int generate(const Options& o) {
  int code = 0;
  auto c = load_or_exit(o, code);
  if (code) return code;
  const std::string dir = o.out.empty() ? geodnn::default_output_dir(c) : o.out;
  geodnn::ensure_writable_dir(dir);
  const std::uint64_t s = c.redraw_per_split ? geodnn::redraw_seed(c.seed, 0) : geodnn::dataset_seed(c);
  const geodnn::Dataset d = geodnn::make_dataset(c, s);
  const auto path = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
  geodnn::io::write_dataset_csv(d, path("dataset.csv"));
  geodnn::io::write_json({{"fingerprint", geodnn::fingerprint(c)}, {"config", geodnn::to_json(c)},
                          {"dataset", d.provenance}},
                         path("provenance.json"));
  if (!o.quiet) std::cout << "wrote " << d.size() << " samples to " << path("dataset.csv") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodnn: deep networks on manifolds"};
  app.require_subcommand(1);
  Options o;
  auto* run_cmd = app.add_subcommand("run", "run an experiment and write metrics");
  add_common(run_cmd, o, true);
  auto* validate_cmd = app.add_subcommand("validate", "check a config and print its fingerprint");
  add_common(validate_cmd, o, false);
  auto* generate_cmd = app.add_subcommand("generate", "write the configured dataset as CSV");
  add_common(generate_cmd, o, true);
  auto* rate_cmd = app.add_subcommand("rate-check", "run a rate-check config");
  add_common(rate_cmd, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return run(o, false);
    if (*validate_cmd) return validate(o);
    if (*generate_cmd) return generate(o);
    if (*rate_cmd) return run(o, true);
  } catch (const geodnn::Error& e) {
    std::cerr << e.what() << '\n';
    if (e.is_geometric()) return kGeometricError;
    if (e.kind() == geodnn::ErrorKind::config || e.kind() == geodnn::ErrorKind::invalid_spec) return kConfigError;
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}
