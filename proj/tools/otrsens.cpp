#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "otrsens/config.hpp"
#include "otrsens/datagen.hpp"
#include "otrsens/dataset_io.hpp"
#include "otrsens/harness.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/policy_learner.hpp"
#include "otrsens/value.hpp"
#include "otrsens/weights.hpp"

namespace fs = std::filesystem;
using namespace otrsens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalidRun = 2;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

RunConfig load(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? parse_config("{}") : load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.jobs) {
    if (*opt.jobs == 0) throw std::invalid_argument("--jobs must be positive");
    cfg.jobs = *opt.jobs;
  }
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

template <class Records>
void log_failures(const Records& records) {
  std::size_t shown = 0;
  for (const auto& r : records) {
    if (r.ok) continue;
    if (++shown > 20) {
      std::cerr << "further failures omitted\n";
      break;
    }
    if constexpr (requires { r.replicate; }) {
      std::cerr << fmt::format("replicate {} (seed {}) {} failed: {}\n", r.replicate, r.seed, r.method, r.error);
    } else {
      std::cerr << fmt::format("resample {} {} at ({}, {}) failed: {}\n", r.resample, r.method, r.alpha_minus,
                               r.alpha_plus, r.error);
    }
  }
}

int report(const RunStatus& status, const fs::path& dir) {
  std::cerr << fmt::format("{} replicates, {} failed; outputs in {}\n", status.replicates, status.failed,
                           dir.string());
  if (!status.valid()) {
    std::cerr << "run invalid: more than 5% of replicates failed\n";
    return kExitInvalidRun;
  }
  return kExitOk;
}

int cmd_gen(const Options& opt) {
  const RunConfig cfg = load(opt);
  const Trial trial = generate_trial(cfg.generative, cfg.seed, 0);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_dataset_csv(dir / "dataset.csv", trial.data);
  auto sidecar = open_out(dir / "dataset_truth.csv");
  sidecar << "stratum,u,a_minus,a_plus\n";
  for (const auto& t : trial.truth) {
    sidecar << fmt::format("{},{:.17g},{},{}\n", to_string(t.stratum), t.u, t.a_minus, t.a_plus);
  }
  std::cerr << fmt::format("wrote {} rows ({} compliers) to {}\n", trial.data.size(), trial.compliers,
                           dir.string());
  return kExitOk;
}

int cmd_fit(const Options& opt) {
  const RunConfig cfg = load(opt);
  const Dataset data = cfg.data_path ? read_dataset_csv(*cfg.data_path)
                                     : generate_trial(cfg.generative, cfg.seed, 0).data;
  NuisanceMasks masks = cfg.scenario.masks;
  if (data.dim_x() != cfg.generative.dim_x) masks = full_masks(data.dim_x());
  Rng mc(cfg.seed, 0, Stream::kMonteCarlo);
  const NuisanceSet ns = NuisanceSet::fit(data, masks, cfg.nuisance, mc);
  SensitivityParams params = cfg.analysis_params();
  if (params.form == SensitivityForm::kPca1 && !params.pca) params.pca = fit_pca1(data);
  params.validate(data.dim_x());
  NuisanceTable table = tabulate(ns, data, params);
  Rng fold_rng(cfg.seed, 0, Stream::kFolds);
  const auto folds = make_folds(data.size(), cfg.nuisance.kappa_folds, fold_rng);
  const KappaModel kappa =
      fit_kappa(data, table, params, cfg.nuisance.kappa_folds, cfg.nuisance.kappa_regressor, folds);
  attach_kappa(table, data, kappa, true);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  std::vector<ValueRecord> values;
  for (Method m : cfg.methods) {
    const std::string name(to_string(m));
    const WeightVector w = compute_weights(m, data, table, params, cfg.baseline_propensity);
    LearnerConfig lc = cfg.learner;
    if (cfg.cross_validate_lambda && !lc.lambda_grid.empty()) lc.lambda = select_lambda(data, w, lc);
    const LinearPolicy policy = learn_policy(data, w, lc);
    auto wout = open_out(dir / fmt::format("weights_{}.csv", name));
    write_weights_csv(wout, w);
    auto pout = open_out(dir / fmt::format("policy_{}.json", name));
    pout << policy_to_json(policy) << "\n";
    for (const auto& est : {ipw_value(data, policy, table, params), mr_value(data, policy, table, params)}) {
      values.push_back({0, fmt::format("{}@{}", to_string(est.method), name), params.minus.aY,
                        params.plus.aY, cfg.scenario.id, est.estimate, est.se, est.n, cfg.seed});
    }
  }
  const EstimateWithSE blip = psi_mr(data, table, params);
  values.push_back({0, "PSI_MR", params.minus.aY, params.plus.aY, cfg.scenario.id, blip.estimate, blip.se,
                    blip.n, cfg.seed});
  auto vout = open_out(dir / "value_estimates.csv");
  write_values_csv(vout, values);
  std::cerr << fmt::format("fitted {} methods on {} rows; outputs in {}\n", cfg.methods.size(), data.size(),
                           dir.string());
  return kExitOk;
}

int cmd_scenario(const Options& opt) {
  const RunConfig cfg = load(opt);
  const ScenarioResult result = run_scenario(cfg);
  write_outputs(result, opt.out);
  log_failures(result.replicates);
  for (const auto& row : result.summary) {
    std::cout << fmt::format("{:<8} {:<6} {:>9.4f} ({:.4f})\n", row.method, row.metric, row.mean, row.sd);
  }
  return report(result.status, opt.out);
}

int cmd_sweep(const Options& opt) {
  const RunConfig cfg = load(opt);
  const SweepResult result = run_sweep(cfg);
  write_outputs(result, opt.out);
  log_failures(result.replicates);
  return report(result.status, opt.out);
}

int cmd_traintest(const Options& opt) {
  const RunConfig cfg = load(opt);
  const TrainTestResult result = run_train_test(cfg);
  write_outputs(result, opt.out);
  log_failures(result.records);
  return report(result.status, opt.out);
}

int cmd_oracle_check(const Options& opt) {
  const RunConfig cfg = load(opt);
  const auto checks = run_oracle_checks(cfg.traintest.oracle);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  auto out = open_out(dir / "oracle_check.csv");
  write_oracle_checks_csv(out, checks);
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (!c.pass) ++failed;
  }
  std::cout << fmt::format("{} checks, {} failed\n", checks.size(), failed);
  return failed == 0 ? kExitOk : kExitInvalidRun;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal treatment regimes among compliers with sensitivity parameters"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Override the master seed");
    sub->add_option("--jobs", opt.jobs, "Worker threads");
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"gen", "Generate one synthetic trial", cmd_gen},
      {"fit", "Fit nuisances, learn policies and estimate values on one dataset", cmd_fit},
      {"scenario", "Run a replicated simulation scenario", cmd_scenario},
      {"sweep", "Sensitivity-parameter grid sweep", cmd_sweep},
      {"traintest", "Repeated train/test value comparison", cmd_traintest},
      {"oracle-check", "Exact checks on the enumerable oracle world", cmd_oracle_check},
  };
  int (*selected)(const Options&) = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&selected, run = c.run] { selected = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    return selected(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
