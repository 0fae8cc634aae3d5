#pragma once

#include "ksdagg/bootstrap.hpp"
#include "ksdagg/rng.hpp"
#include "ksdagg/stein.hpp"
#include "ksdagg/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ksdagg {

enum class Experiment { gamma, rbm, custom };
enum class TestKind { ksdagg, ksdagg_star, median, split, split_extra };
enum class Scale { paper, desk };
enum class OutputFormat { csv, json };

std::string_view to_string(Experiment experiment);
std::string_view to_string(TestKind test);
Experiment parse_experiment(std::string_view name);
TestKind parse_test_kind(std::string_view name);
/// "all" expands to every test.
std::vector<TestKind> parse_test_list(std::string_view name);
Scale parse_scale(std::string_view name);
OutputFormat parse_output_format(std::string_view name);

struct ExperimentConfig {
  Experiment experiment = Experiment::gamma;
  std::vector<TestKind> tests{TestKind::ksdagg};
  std::size_t n = 500;
  double alpha = 0.05;
  std::size_t b1 = 500;
  std::size_t b2 = 500;
  std::size_t b3 = 50;
  BootstrapKind bootstrap = BootstrapKind::parametric;
  double imq_beta = 0.5;

  /// Λ(ell_lo, ell_hi) = {2^i λ_med : i = ell_lo..ell_hi}
  int ell_lo = 0;
  int ell_hi = 10;

  int star_count = 10;
  std::size_t star_b1 = 2000;
  std::size_t star_b2 = 2000;
  BootstrapKind star_bootstrap = BootstrapKind::parametric;

  /// Alternative parameter grid: shape shift s (gamma) or noise σ (rbm).
  std::vector<double> params{0.0, 0.1, 0.2, 0.3, 0.4};
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::size_t rbm_dim = 50;
  std::size_t rbm_hidden = 40;
  std::size_t burn_in = 2000;

  /// When false the seconds column is written as 0, making output a pure
  /// function of the configuration.
  bool record_timing = true;

  void validate() const;
};

ExperimentConfig preset(Experiment experiment, Scale scale);

/// Overlays the fields present in `doc` (keys as in the CLI, e.g. "b1",
/// "test", "params") onto `base`. Unknown keys are rejected.
ExperimentConfig apply_config_json(ExperimentConfig base, const nlohmann::json& doc);

/// Warnings for B₁/B₂/B₃ below the sufficient sizes of the power guarantees,
/// evaluated for a target type II error `beta`.
std::vector<std::string> bootstrap_size_warnings(const ExperimentConfig& config,
                                                 std::size_t kernel_count,
                                                 double beta = 0.2);

struct ResultRow {
  std::string experiment;
  std::string test;
  double param = 0.0;
  std::size_t n = 0;
  double rate = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Data for one repetition: the tested sample and, when requested, an
/// independent sample of the same size from the same distribution.
struct ScenarioDraw {
  DataMatrix data;
  std::optional<DataMatrix> extra;
};

struct Scenario {
  std::string name;
  std::uint64_t id = 0;
  std::vector<double> params;
  std::function<ScenarioDraw(std::size_t param_index, std::size_t n, bool with_extra,
                             const RngStream& rng)>
      draw;
};

struct NamedTest {
  std::string name;
  std::uint64_t id = 0;
  bool needs_extra = false;
  std::function<bool(const DataMatrix& data, const std::optional<DataMatrix>& extra,
                     const RngStream& rng)>
      run;
};

struct RepetitionPlan {
  std::size_t n = 0;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool record_timing = true;
};

/// A repetition failed; the message names the seed and stream to replay it.
class RepetitionError : public std::runtime_error {
 public:
  RepetitionError(const std::string& what, std::uint64_t seed, std::uint64_t stream)
      : std::runtime_error(what), seed_(seed), stream_(stream) {}
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Stream of the data drawn for (param, rep). Every test sees the same data.
RngStream data_stream(std::uint64_t seed, std::uint64_t scenario_id, std::size_t param_index,
                      std::size_t rep);
/// Stream handed to test `test_id` for (param, rep).
RngStream test_stream(std::uint64_t seed, std::uint64_t scenario_id, std::uint64_t test_id,
                      std::size_t param_index, std::size_t rep);

/// Runs every test on `plan.reps` fresh draws for each parameter value and
/// returns one row per (test, parameter), ordered by parameter then test.
std::vector<ResultRow> run_repetitions(const Scenario& scenario, std::span<const NamedTest> tests,
                                       const RepetitionPlan& plan);

/// Test closures for the configured test kinds against `model`.
std::vector<NamedTest> make_tests(const ExperimentConfig& config, const ScoreModel& model);

/// Model Gamma(5, 5); data Gamma(5 + s, 5) for s in `config.params`.
std::vector<ResultRow> gamma_experiment(const ExperimentConfig& config);
/// Base RBM p drawn from the master seed; data from Gibbs chains of p with
/// N(0, σ²) noise added to B, for σ in `config.params`.
std::vector<ResultRow> rbm_experiment(const ExperimentConfig& config);
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

std::string format_csv(std::span<const ResultRow> rows);
nlohmann::json rows_to_json(std::span<const ResultRow> rows);
std::vector<ResultRow> rows_from_json(const nlohmann::json& doc);

/// Writes rows to `path` ("-" for stdout). Throws IoError if unwritable.
void emit_results(std::span<const ResultRow> rows, OutputFormat format, const std::string& path);

}  // namespace ksdagg
