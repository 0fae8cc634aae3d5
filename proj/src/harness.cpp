#include "ksdagg/harness.hpp"

#include "ksdagg/aggregation.hpp"
#include "ksdagg/baselines.hpp"
#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "ksdagg/models.hpp"
#include "ksdagg/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

namespace ksdagg {

namespace {

constexpr std::uint64_t kGammaScenario = 1;
constexpr std::uint64_t kRbmScenario = 2;

std::uint64_t test_id(TestKind kind) { return static_cast<std::uint64_t>(kind) + 1; }

}  // namespace

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::gamma: return "gamma";
    case Experiment::rbm: return "rbm";
    case Experiment::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(TestKind test) {
  switch (test) {
    case TestKind::ksdagg: return "ksdagg";
    case TestKind::ksdagg_star: return "ksdagg_star";
    case TestKind::median: return "median";
    case TestKind::split: return "split";
    case TestKind::split_extra: return "split_extra";
  }
  return "ksdagg";
}

Experiment parse_experiment(std::string_view name) {
  if (name == "gamma") return Experiment::gamma;
  if (name == "rbm") return Experiment::rbm;
  if (name == "custom") return Experiment::custom;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

TestKind parse_test_kind(std::string_view name) {
  for (auto kind : {TestKind::ksdagg, TestKind::ksdagg_star, TestKind::median, TestKind::split,
                    TestKind::split_extra}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown test '" + std::string(name) + "'");
}

std::vector<TestKind> parse_test_list(std::string_view name) {
  if (name == "all") {
    return {TestKind::ksdagg, TestKind::ksdagg_star, TestKind::median, TestKind::split,
            TestKind::split_extra};
  }
  return {parse_test_kind(name)};
}

Scale parse_scale(std::string_view name) {
  if (name == "paper") return Scale::paper;
  if (name == "desk") return Scale::desk;
  throw ConfigError("unknown scale '" + std::string(name) + "'");
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (experiment == Experiment::custom) {
    throw ConfigError("custom experiments are run through run_repetitions");
  }
  if (tests.empty()) throw ConfigError("no tests selected");
  if (!(alpha > 0.0 && alpha < std::exp(-1.0))) throw ConfigError("alpha must lie in (0, 1/e)");
  if (n < 2) throw ConfigError("N must be at least 2");
  if (b1 < 1 || b2 < 1 || b3 < 1 || star_b1 < 1 || star_b2 < 1) {
    throw ConfigError("B1, B2 and B3 must be positive");
  }
  if (ell_lo >= ell_hi) throw ConfigError("collection needs ell_lo < ell_hi");
  if (star_count < 2) throw ConfigError("star collection needs at least two bandwidths");
  if (params.empty()) throw ConfigError("parameter grid is empty");
  if (reps < 1) throw ConfigError("repetitions must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(imq_beta > 0.0 && imq_beta < 1.0)) throw ConfigError("IMQ exponent must lie in (0, 1)");
  const bool splits = std::find(tests.begin(), tests.end(), TestKind::split) != tests.end();
  if (splits && n < 4) throw ConfigError("the split test needs N >= 4");
  if (experiment == Experiment::rbm && (rbm_dim == 0 || rbm_hidden == 0)) {
    throw ConfigError("RBM dimensions must be positive");
  }
  for (double p : params) {
    if (!std::isfinite(p) || p < 0.0) throw ConfigError("parameter grid values must be >= 0");
  }
}

ExperimentConfig preset(Experiment experiment, Scale scale) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == Experiment::gamma) {
    c.ell_lo = 0;
    c.ell_hi = 10;
    c.bootstrap = BootstrapKind::parametric;
    c.star_bootstrap = BootstrapKind::parametric;
    c.params = {0.0, 0.1, 0.2, 0.3, 0.4};
    if (scale == Scale::paper) {
      c.n = 500;
      c.b1 = c.b2 = 500;
      c.star_b1 = c.star_b2 = 2000;
      c.reps = 200;
    } else {
      c.n = 200;
      c.b1 = c.b2 = 200;
      c.star_b1 = c.star_b2 = 200;
      c.reps = 100;
    }
  } else if (experiment == Experiment::rbm) {
    c.ell_lo = -20;
    c.ell_hi = 0;
    c.star_bootstrap = BootstrapKind::wild;
    if (scale == Scale::paper) {
      c.n = 1000;
      c.rbm_dim = 50;
      c.rbm_hidden = 40;
      c.params = {0.0, 0.01, 0.02, 0.03};
      c.bootstrap = BootstrapKind::parametric;
      c.b1 = c.b2 = 500;
      c.star_b1 = c.star_b2 = 2000;
      c.reps = 200;
    } else {
      c.n = 200;
      c.rbm_dim = 10;
      c.rbm_hidden = 5;
      c.params = {0.0, 0.1};
      c.bootstrap = BootstrapKind::wild;
      c.b1 = c.b2 = 500;
      c.star_b1 = c.star_b2 = 500;
      c.reps = 100;
    }
  }
  return c;
}

ExperimentConfig apply_config_json(ExperimentConfig c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  static const std::set<std::string> cli_only{"scale", "out", "format"};
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "experiment") c.experiment = parse_experiment(value.get<std::string>());
      else if (key == "test") {
        if (value.is_array()) {
          c.tests.clear();
          for (const auto& t : value) {
            for (auto kind : parse_test_list(t.get<std::string>())) c.tests.push_back(kind);
          }
        } else {
          c.tests = parse_test_list(value.get<std::string>());
        }
      }
      else if (key == "n") c.n = value.get<std::size_t>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "b1") c.b1 = value.get<std::size_t>();
      else if (key == "b2") c.b2 = value.get<std::size_t>();
      else if (key == "b3") c.b3 = value.get<std::size_t>();
      else if (key == "bootstrap") c.bootstrap = parse_bootstrap_kind(value.get<std::string>());
      else if (key == "imq_beta") c.imq_beta = value.get<double>();
      else if (key == "ell_lo") c.ell_lo = value.get<int>();
      else if (key == "ell_hi") c.ell_hi = value.get<int>();
      else if (key == "star_count") c.star_count = value.get<int>();
      else if (key == "star_b1") c.star_b1 = value.get<std::size_t>();
      else if (key == "star_b2") c.star_b2 = value.get<std::size_t>();
      else if (key == "star_bootstrap") {
        c.star_bootstrap = parse_bootstrap_kind(value.get<std::string>());
      }
      else if (key == "params") c.params = value.get<std::vector<double>>();
      else if (key == "reps") c.reps = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<std::size_t>();
      else if (key == "d") c.rbm_dim = value.get<std::size_t>();
      else if (key == "dh") c.rbm_hidden = value.get<std::size_t>();
      else if (key == "burn_in") c.burn_in = value.get<std::size_t>();
      else if (key == "timing") c.record_timing = value.get<bool>();
      else if (!cli_only.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  return c;
}

std::vector<std::string> bootstrap_size_warnings(const ExperimentConfig& config,
                                                 std::size_t kernel_count, double beta) {
  std::vector<std::string> out;
  const double a = config.alpha;
  const double k = static_cast<double>(std::max<std::size_t>(kernel_count, 1));
  const double tail = std::log(8.0 / beta) + a * (1.0 - a);
  const double b1_needed = 12.0 * k * k * tail / (a * a);
  const double b2_needed = 8.0 * std::log(2.0 / beta) / (a * a);
  const double b3_needed = std::log2(4.0 * k / a);
  if (static_cast<double>(config.b1) < b1_needed) {
    out.push_back(fmt::format("B1={} is below the sufficient size {:.0f} for the power guarantee",
                              config.b1, std::ceil(b1_needed)));
  }
  if (static_cast<double>(config.b2) < b2_needed) {
    out.push_back(fmt::format("B2={} is below the sufficient size {:.0f} for the power guarantee",
                              config.b2, std::ceil(b2_needed)));
  }
  if (static_cast<double>(config.b3) < b3_needed) {
    out.push_back(fmt::format("B3={} is below the sufficient size {:.0f} for the power guarantee",
                              config.b3, std::ceil(b3_needed)));
  }
  return out;
}

RngStream data_stream(std::uint64_t seed, std::uint64_t scenario_id, std::size_t param_index,
                      std::size_t rep) {
  return RngStream(seed).child({scenario_id, 0, param_index, rep});
}

RngStream test_stream(std::uint64_t seed, std::uint64_t scenario_id, std::uint64_t test_id,
                      std::size_t param_index, std::size_t rep) {
  return RngStream(seed).child({scenario_id, 1 + test_id, param_index, rep});
}

std::vector<ResultRow> run_repetitions(const Scenario& scenario, std::span<const NamedTest> tests,
                                       const RepetitionPlan& plan) {
  if (plan.reps < 1) throw ConfigError("repetitions must be at least 1");
  if (scenario.params.empty()) throw ConfigError("parameter grid is empty");
  if (!scenario.draw) throw ConfigError("scenario has no data generator");
  const bool with_extra =
      std::any_of(tests.begin(), tests.end(), [](const NamedTest& t) { return t.needs_extra; });

  const std::size_t params = scenario.params.size();
  const std::size_t tasks = params * plan.reps;
  // outcome[(task * tests) + t]
  std::vector<char> rejected(tasks * tests.size(), 0);
  std::vector<double> seconds(tasks * tests.size(), 0.0);

  parallel_for(tasks, plan.workers, [&](std::size_t task) {
    const std::size_t p = task / plan.reps;
    const std::size_t rep = task % plan.reps;
    const RngStream drng = data_stream(plan.seed, scenario.id, p, rep);
    ScenarioDraw draw;
    try {
      draw = scenario.draw(p, plan.n, with_extra, drng);
    } catch (const std::exception& e) {
      throw RepetitionError(
          fmt::format("{} data draw failed (param index {}, rep {}, seed {}, stream {}): {}",
                      scenario.name, p, rep, drng.seed(), drng.stream(), e.what()),
          drng.seed(), drng.stream());
    }
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const RngStream trng = test_stream(plan.seed, scenario.id, tests[t].id, p, rep);
      const auto start = std::chrono::steady_clock::now();
      try {
        rejected[task * tests.size() + t] = tests[t].run(draw.data, draw.extra, trng) ? 1 : 0;
      } catch (const std::exception& e) {
        throw RepetitionError(
            fmt::format("{} failed (param index {}, rep {}, seed {}, stream {}): {}",
                        tests[t].name, p, rep, trng.seed(), trng.stream(), e.what()),
            trng.seed(), trng.stream());
      }
      seconds[task * tests.size() + t] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  std::vector<ResultRow> rows;
  rows.reserve(params * tests.size());
  for (std::size_t p = 0; p < params; ++p) {
    for (std::size_t t = 0; t < tests.size(); ++t) {
      std::size_t count = 0;
      double total_seconds = 0.0;
      for (std::size_t rep = 0; rep < plan.reps; ++rep) {
        const std::size_t slot = (p * plan.reps + rep) * tests.size() + t;
        count += static_cast<std::size_t>(rejected[slot]);
        total_seconds += seconds[slot];
      }
      ResultRow row;
      row.experiment = scenario.name;
      row.test = tests[t].name;
      row.param = scenario.params[p];
      row.n = plan.n;
      row.rate = static_cast<double>(count) / static_cast<double>(plan.reps);
      row.reps = plan.reps;
      row.seed = plan.seed;
      row.seconds = plan.record_timing ? total_seconds : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<NamedTest> make_tests(const ExperimentConfig& config, const ScoreModel& model) {
  std::vector<NamedTest> out;
  for (TestKind kind : config.tests) {
    NamedTest test;
    test.name = std::string(to_string(kind));
    test.id = test_id(kind);
    switch (kind) {
      case TestKind::ksdagg:
        test.run = [config, model](const DataMatrix& x, const std::optional<DataMatrix>&,
                                   const RngStream& rng) {
          AggConfig agg;
          agg.alpha = config.alpha;
          agg.b1 = config.b1;
          agg.b2 = config.b2;
          agg.b3 = config.b3;
          agg.bootstrap = config.bootstrap;
          agg.imq_beta = config.imq_beta;
          agg.collection =
              power_of_two_collection(median_bandwidth(x), config.ell_lo, config.ell_hi);
          return ksdagg_test(x, model, agg, rng).reject;
        };
        break;
      case TestKind::ksdagg_star:
        test.run = [config, model](const DataMatrix& x, const std::optional<DataMatrix>&,
                                   const RngStream& rng) {
          AggConfig agg;
          agg.alpha = config.alpha;
          agg.b1 = config.star_b1;
          agg.b2 = config.star_b2;
          agg.b3 = config.b3;
          agg.bootstrap = config.star_bootstrap;
          agg.imq_beta = config.imq_beta;
          agg.collection = ksdagg_star_collection(x, config.star_count);
          TestReport report = ksdagg_test(x, model, agg, rng);
          return report.reject;
        };
        break;
      case TestKind::median:
        test.run = [config, model](const DataMatrix& x, const std::optional<DataMatrix>&,
                                   const RngStream& rng) {
          return median_test(x, model, config.alpha, config.b1, config.bootstrap,
                             KernelFamily::imq, config.imq_beta, rng)
              .reject;
        };
        break;
      case TestKind::split:
        test.run = [config, model](const DataMatrix& x, const std::optional<DataMatrix>&,
                                   const RngStream& rng) {
          const auto collection = power_of_two_collection(
              median_bandwidth(split_selection_rows(x)), config.ell_lo, config.ell_hi);
          return split_test(x, model, collection, KernelFamily::imq, config.imq_beta,
                            config.alpha, config.b1, config.bootstrap, std::nullopt, rng)
              .reject;
        };
        break;
      case TestKind::split_extra:
        test.needs_extra = true;
        test.run = [config, model](const DataMatrix& x, const std::optional<DataMatrix>& extra,
                                   const RngStream& rng) {
          if (!extra) throw ConfigError("split_extra needs an extra sample");
          const auto collection =
              power_of_two_collection(median_bandwidth(*extra), config.ell_lo, config.ell_hi);
          return split_test(x, model, collection, KernelFamily::imq, config.imq_beta,
                            config.alpha, config.b1, config.bootstrap, extra, rng)
              .reject;
        };
        break;
    }
    out.push_back(std::move(test));
  }
  return out;
}

namespace {

std::vector<ResultRow> run_scenario(const ExperimentConfig& config, const Scenario& scenario,
                                    const ScoreModel& model) {
  const auto tests = make_tests(config, model);
  RepetitionPlan plan;
  plan.n = config.n;
  plan.reps = config.reps;
  plan.seed = config.seed;
  plan.workers = config.workers;
  plan.record_timing = config.record_timing;
  return run_repetitions(scenario, tests, plan);
}

}  // namespace

std::vector<ResultRow> gamma_experiment(const ExperimentConfig& config) {
  config.validate();
  const GammaModel p{5.0, 5.0};
  Scenario scenario;
  scenario.name = "gamma";
  scenario.id = kGammaScenario;
  scenario.params = config.params;
  scenario.draw = [params = config.params](std::size_t index, std::size_t n, bool with_extra,
                                           const RngStream& rng) {
    const GammaModel q{5.0 + params[index], 5.0};
    ScenarioDraw draw;
    draw.data = gamma_sample(q, n, rng.child(0));
    if (with_extra) draw.extra = gamma_sample(q, n, rng.child(1));
    return draw;
  };
  return run_scenario(config, scenario, make_score_model(p));
}

std::vector<ResultRow> rbm_experiment(const ExperimentConfig& config) {
  config.validate();
  const RbmModel p = random_rbm(config.rbm_dim, config.rbm_hidden,
                                RngStream(config.seed).child({kRbmScenario, 0xb0de}),
                                config.burn_in);
  Scenario scenario;
  scenario.name = "rbm";
  scenario.id = kRbmScenario;
  scenario.params = config.params;
  scenario.draw = [p, params = config.params](std::size_t index, std::size_t n, bool with_extra,
                                              const RngStream& rng) {
    const RbmModel q = perturb_rbm(p, params[index], rng.child(2));
    ScenarioDraw draw;
    draw.data = rbm_gibbs_sample(q, n, rng.child(0));
    if (with_extra) draw.extra = rbm_gibbs_sample(q, n, rng.child(1));
    return draw;
  };
  return run_scenario(config, scenario, make_score_model(p));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::gamma: return gamma_experiment(config);
    case Experiment::rbm: return rbm_experiment(config);
    case Experiment::custom: break;
  }
  throw ConfigError("custom experiments are run through run_repetitions");
}

std::string format_csv(std::span<const ResultRow> rows) {
  std::string out = "experiment,test,param,N,rate,reps,seed,seconds\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.6f},{},{},{:.3f}\n", r.experiment, r.test, r.param, r.n,
                       r.rate, r.reps, r.seed, r.seconds);
  }
  return out;
}

nlohmann::json rows_to_json(std::span<const ResultRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"experiment", r.experiment},
                   {"test", r.test},
                   {"param", r.param},
                   {"N", r.n},
                   {"rate", r.rate},
                   {"reps", r.reps},
                   {"seed", r.seed},
                   {"seconds", r.seconds}});
  }
  return out;
}

std::vector<ResultRow> rows_from_json(const nlohmann::json& doc) {
  std::vector<ResultRow> rows;
  try {
    for (const auto& item : doc) {
      ResultRow r;
      r.experiment = item.at("experiment").get<std::string>();
      r.test = item.at("test").get<std::string>();
      r.param = item.at("param").get<double>();
      r.n = item.at("N").get<std::size_t>();
      r.rate = item.at("rate").get<double>();
      r.reps = item.at("reps").get<std::size_t>();
      r.seed = item.at("seed").get<std::uint64_t>();
      r.seconds = item.at("seconds").get<double>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed result document: ") + e.what());
  }
  return rows;
}

void emit_results(std::span<const ResultRow> rows, OutputFormat format, const std::string& path) {
  const std::string text =
      format == OutputFormat::csv ? format_csv(rows) : rows_to_json(rows).dump(2) + "\n";
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

}  // namespace ksdagg
