// Command-line driver for the Gamma and RBM rejection-rate experiments.

#include "ksdagg/errors.hpp"
#include "ksdagg/harness.hpp"
#include "ksdagg/kernels.hpp"
#include "ksdagg/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct RunOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> experiment;
  std::optional<std::string> test;
  std::optional<std::size_t> n;
  std::optional<double> alpha;
  std::optional<std::size_t> b1, b2, b3;
  std::optional<std::string> bootstrap;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> ell_lo, ell_hi;
  std::optional<std::vector<double>> params;
  std::optional<std::size_t> dim, hidden, burn_in;
  bool no_timing = false;
};

nlohmann::json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ksdagg::IoError("cannot read config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ksdagg::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

int run(const RunOptions& opt) {
  nlohmann::json file_doc = nlohmann::json::object();
  if (opt.config_path) file_doc = read_config(*opt.config_path);

  auto pick = [&](const std::optional<std::string>& flag, const char* key,
                  const std::string& fallback) {
    if (flag) return *flag;
    if (file_doc.contains(key)) return file_doc.at(key).get<std::string>();
    return fallback;
  };

  const auto experiment = ksdagg::parse_experiment(pick(opt.experiment, "experiment", "gamma"));
  const auto scale = ksdagg::parse_scale(pick(opt.scale, "scale", "desk"));
  const auto format = ksdagg::parse_output_format(pick(opt.format, "format", "csv"));
  const std::string out_path = pick(opt.out, "out", "-");

  ksdagg::ExperimentConfig config = ksdagg::preset(experiment, scale);
  config.workers = ksdagg::default_worker_count();
  config = ksdagg::apply_config_json(config, file_doc);

  if (opt.test) config.tests = ksdagg::parse_test_list(*opt.test);
  if (opt.n) config.n = *opt.n;
  if (opt.alpha) config.alpha = *opt.alpha;
  if (opt.b1) config.b1 = config.star_b1 = *opt.b1;
  if (opt.b2) config.b2 = config.star_b2 = *opt.b2;
  if (opt.b3) config.b3 = *opt.b3;
  if (opt.bootstrap) config.bootstrap = ksdagg::parse_bootstrap_kind(*opt.bootstrap);
  if (opt.reps) config.reps = *opt.reps;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.ell_lo) config.ell_lo = *opt.ell_lo;
  if (opt.ell_hi) config.ell_hi = *opt.ell_hi;
  if (opt.params) config.params = *opt.params;
  if (opt.dim) config.rbm_dim = *opt.dim;
  if (opt.hidden) config.rbm_hidden = *opt.hidden;
  if (opt.burn_in) config.burn_in = *opt.burn_in;
  if (opt.no_timing) config.record_timing = false;
  config.workers = std::min(config.workers, ksdagg::default_worker_count());
  config.validate();

  const bool aggregated = std::find(config.tests.begin(), config.tests.end(),
                                     ksdagg::TestKind::ksdagg) != config.tests.end();
  if (aggregated) {
    const auto kernels = static_cast<std::size_t>(config.ell_hi - config.ell_lo + 1);
    for (const auto& warning : ksdagg::bootstrap_size_warnings(config, kernels)) {
      std::cerr << "warning: " << warning << '\n';
    }
  }

  const auto rows = ksdagg::run_experiment(config);
  ksdagg::emit_results(rows, format, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregated kernel Stein discrepancy goodness-of-fit experiments"};
  app.require_subcommand(1);

  RunOptions opt;
  auto* cmd = app.add_subcommand("run", "Estimate rejection rates over repeated draws");
  cmd->add_option("--config", opt.config_path, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--experiment", opt.experiment, "gamma | rbm")
      ->check(CLI::IsMember({"gamma", "rbm"}));
  cmd->add_option("--test", opt.test, "ksdagg | ksdagg_star | median | split | split_extra | all")
      ->check(CLI::IsMember({"ksdagg", "ksdagg_star", "median", "split", "split_extra", "all"}));
  cmd->add_option("--n", opt.n, "Sample size N");
  cmd->add_option("--alpha", opt.alpha, "Test level");
  cmd->add_option("--b1", opt.b1, "Bootstrap replicates for the quantiles");
  cmd->add_option("--b2", opt.b2, "Bootstrap replicates for the level correction");
  cmd->add_option("--b3", opt.b3, "Bisection steps for the level correction");
  cmd->add_option("--bootstrap", opt.bootstrap, "wild | parametric")
      ->check(CLI::IsMember({"wild", "parametric"}));
  cmd->add_option("--reps", opt.reps, "Repetitions per parameter value");
  cmd->add_option("--seed", opt.seed, "Master seed");
  cmd->add_option("--scale", opt.scale, "paper | desk preset (default desk)")
      ->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--out", opt.out, "Output path, - for stdout");
  cmd->add_option("--format", opt.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--ell-lo", opt.ell_lo, "Lower exponent of the power-of-two collection");
  cmd->add_option("--ell-hi", opt.ell_hi, "Upper exponent of the power-of-two collection");
  cmd->add_option("--params", opt.params, "Alternative grid: shape shifts or noise levels");
  cmd->add_option("--d", opt.dim, "RBM visible dimension");
  cmd->add_option("--dh", opt.hidden, "RBM hidden dimension");
  cmd->add_option("--burn-in", opt.burn_in, "Gibbs burn-in sweeps");
  cmd->add_flag("--no-timing", opt.no_timing, "Write 0 in the seconds column");

  CLI11_PARSE(app, argc, argv);

  try {
    return run(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
