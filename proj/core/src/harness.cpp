#include "otrsens/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "otrsens/datagen.hpp"
#include "otrsens/numerics.hpp"
#include "otrsens/oracle.hpp"
#include "otrsens/regression.hpp"
#include "otrsens/value.hpp"
#include "otrsens/weights.hpp"

namespace otrsens {

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

namespace {

struct MeanSd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = mean(v);
  out.sd = v.size() > 1 ? sample_sd(v) : 0.0;
  return out;
}

SensitivityParams resolve_params(SensitivityParams params, const Dataset& data) {
  if (params.form == SensitivityForm::kPca1 && !params.pca) params.pca = fit_pca1(data);
  return params;
}

std::vector<EvalPoint> eval_points(const Trial& trial) {
  std::vector<EvalPoint> pts;
  pts.reserve(trial.data.size());
  for (std::size_t i = 0; i < trial.data.size(); ++i) {
    pts.push_back({trial.data[i].x, trial.truth[i].optimal_action});
  }
  return pts;
}

struct Learned {
  LinearPolicy policy;
  double lambda = 0.0;
};

Learned learn(Method method, const Dataset& data, const NuisanceTable& table,
              const SensitivityParams& params, const RunConfig& cfg) {
  const WeightVector w = compute_weights(method, data, table, params, cfg.baseline_propensity);
  LearnerConfig lc = cfg.learner;
  if (cfg.cross_validate_lambda && !lc.lambda_grid.empty()) lc.lambda = select_lambda(data, w, lc);
  return {learn_policy(data, w, lc), lc.lambda};
}

void check_methods(const std::vector<Method>& methods) {
  if (methods.empty()) throw std::invalid_argument("no methods configured");
  for (Method m : methods) {
    if (m == Method::kMrKnownFz) {
      throw std::invalid_argument("MR_KNOWN_FZ is an evaluator, not a learning method");
    }
  }
}

std::size_t count_failed_replicates(const std::vector<ReplicateRecord>& records) {
  std::map<std::size_t, bool> failed;
  for (const auto& r : records) failed[r.replicate] = failed[r.replicate] || !r.ok;
  return static_cast<std::size_t>(
      std::count_if(failed.begin(), failed.end(), [](const auto& kv) { return kv.second; }));
}

void open_and_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  fn(out);
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario

ScenarioResult run_scenario(const RunConfig& cfg) {
  check_methods(cfg.methods);
  const TruthOracle truth(cfg.generative, cfg.truth_points, cfg.seed, cfg.truth_population);
  const std::string scenario = cfg.scenario.id;
  const auto& base_params = cfg.analysis_params();
  const double am = base_params.minus.aY;
  const double ap = base_params.plus.aY;
  const bool with_values = cfg.scenario.estimate_values;

  struct Slot {
    std::vector<ReplicateRecord> records;
    std::vector<ValueRecord> values;
  };
  std::vector<Slot> slots(cfg.replicates);

  parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    Slot& slot = slots[r];
    auto make_record = [&](Method m) {
      ReplicateRecord rec;
      rec.replicate = r;
      rec.seed = cfg.seed;
      rec.method = std::string(to_string(m));
      rec.scenario = scenario;
      rec.alpha_minus = am;
      rec.alpha_plus = ap;
      return rec;
    };
    try {
      const Trial trial = generate_trial(cfg.generative, cfg.seed, r);
      Rng mc(cfg.seed, r, Stream::kMonteCarlo);
      const NuisanceSet ns = NuisanceSet::fit(trial.data, cfg.scenario.masks, cfg.nuisance, mc);
      const SensitivityParams params = resolve_params(base_params, trial.data);
      NuisanceTable table = tabulate(ns, trial.data, params);
      const auto pts = eval_points(trial);

      std::optional<LinearPolicy> value_policy;
      for (Method m : cfg.methods) {
        ReplicateRecord rec = make_record(m);
        try {
          const Learned l = learn(m, trial.data, table, params, cfg);
          rec.lambda = l.lambda;
          rec.rate = correct_classification_rate(l.policy, pts);
          rec.value = truth.value(l.policy);
          if (m == cfg.value_policy) value_policy = l.policy;
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.error = e.what();
        }
        slot.records.push_back(std::move(rec));
      }

      if (with_values) {
        if (!value_policy) value_policy = learn(cfg.value_policy, trial.data, table, params, cfg).policy;
        Rng fold_rng(cfg.seed, r, Stream::kFolds);
        const auto folds = make_folds(trial.data.size(), cfg.nuisance.kappa_folds, fold_rng);
        const KappaModel kappa = fit_kappa(trial.data, table, params, cfg.nuisance.kappa_folds,
                                           cfg.nuisance.kappa_regressor, folds);
        attach_kappa(table, trial.data, kappa, true);
        const EstimateWithSE ipw = ipw_value(trial.data, *value_policy, table, params);
        const EstimateWithSE mr = mr_value(trial.data, *value_policy, table, params);
        const double true_value = truth.value(*value_policy);
        const std::size_t n = trial.data.size();
        slot.values.push_back({r, "IPW", am, ap, scenario, ipw.estimate, ipw.se, n, cfg.seed});
        slot.values.push_back({r, "MR", am, ap, scenario, mr.estimate, mr.se, n, cfg.seed});
        slot.values.push_back({r, "TRUTH", am, ap, scenario, true_value, 0.0, n, cfg.seed});
      }
    } catch (const std::exception& e) {
      slot.records.clear();
      slot.values.clear();
      for (Method m : cfg.methods) {
        ReplicateRecord rec = make_record(m);
        rec.ok = false;
        rec.error = e.what();
        slot.records.push_back(std::move(rec));
      }
    }
  });

  ScenarioResult result;
  for (auto& s : slots) {
    for (auto& rec : s.records) result.replicates.push_back(std::move(rec));
    for (auto& v : s.values) result.values.push_back(std::move(v));
  }
  result.status.replicates = cfg.replicates;
  result.status.failed = count_failed_replicates(result.replicates);

  for (Method m : cfg.methods) {
    const std::string name(to_string(m));
    std::vector<double> rates, values;
    std::size_t failed = 0;
    for (const auto& rec : result.replicates) {
      if (rec.method != name) continue;
      if (!rec.ok) {
        ++failed;
        continue;
      }
      rates.push_back(rec.rate);
      values.push_back(rec.value);
    }
    const MeanSd rs = mean_sd(rates), vs = mean_sd(values);
    result.summary.push_back({name, scenario, "rate", rs.mean, rs.sd, rates.size(), failed});
    result.summary.push_back({name, scenario, "value", vs.mean, vs.sd, values.size(), failed});
  }
  result.summary.push_back(
      {"OPTIMAL", scenario, "value", truth.optimal_value(), 0.0, cfg.replicates, 0});
  if (with_values) {
    for (const std::string name : {"IPW", "MR", "TRUTH"}) {
      std::vector<double> est, se;
      for (const auto& v : result.values) {
        if (v.method != name) continue;
        est.push_back(v.estimate);
        se.push_back(v.se);
      }
      const MeanSd es = mean_sd(est), ss = mean_sd(se);
      const std::size_t failed = cfg.replicates - est.size();
      result.summary.push_back({name, scenario, "estimate", es.mean, es.sd, est.size(), failed});
      result.summary.push_back({name, scenario, "se", ss.mean, ss.sd, se.size(), failed});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweep

SweepResult run_sweep(const RunConfig& cfg) {
  check_methods(cfg.methods);
  const TruthOracle truth(cfg.generative, cfg.truth_points, cfg.seed, cfg.truth_population);
  const auto& grid = cfg.sweep;
  const std::size_t cells = grid.alpha_minus.size() * grid.alpha_plus.size();
  const std::string scenario = cfg.scenario.id;

  std::vector<std::vector<ReplicateRecord>> slots(cfg.replicates);
  parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    auto& out = slots[r];
    out.reserve(cells * cfg.methods.size());
    std::optional<Trial> trial;
    std::optional<NuisanceSet> ns;
    std::string setup_error;
    try {
      trial = generate_trial(cfg.generative, cfg.seed, r);
      Rng mc(cfg.seed, r, Stream::kMonteCarlo);
      ns = NuisanceSet::fit(trial->data, cfg.scenario.masks, cfg.nuisance, mc);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    const auto pts = trial ? eval_points(*trial) : std::vector<EvalPoint>{};
    // OWL and IVT weights do not involve the sensitivity parameters.
    std::map<Method, std::pair<std::optional<Learned>, std::string>> invariant;

    for (double am : grid.alpha_minus) {
      for (double ap : grid.alpha_plus) {
        const auto params = SensitivityParams::y_only(am, ap, grid.a0_minus, grid.a0_plus);
        std::optional<NuisanceTable> table;
        std::string table_error = setup_error;
        if (setup_error.empty()) {
          try {
            table = tabulate(*ns, trial->data, params);
          } catch (const std::exception& e) {
            table_error = e.what();
          }
        }
        for (Method m : cfg.methods) {
          ReplicateRecord rec;
          rec.replicate = r;
          rec.seed = cfg.seed;
          rec.method = std::string(to_string(m));
          rec.scenario = scenario;
          rec.alpha_minus = am;
          rec.alpha_plus = ap;
          if (!table) {
            rec.ok = false;
            rec.error = table_error;
            out.push_back(std::move(rec));
            continue;
          }
          const bool alpha_free = m == Method::kOwl || m == Method::kIvt;
          try {
            Learned l;
            if (alpha_free) {
              auto& cached = invariant[m];
              if (!cached.first && cached.second.empty()) {
                try {
                  cached.first = learn(m, trial->data, *table, params, cfg);
                } catch (const std::exception& e) {
                  cached.second = e.what();
                }
              }
              if (!cached.first) throw std::runtime_error(cached.second);
              l = *cached.first;
            } else {
              l = learn(m, trial->data, *table, params, cfg);
            }
            rec.lambda = l.lambda;
            rec.rate = correct_classification_rate(l.policy, pts);
            rec.value = truth.value(l.policy);
          } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
          }
          out.push_back(std::move(rec));
        }
      }
    }
  });

  SweepResult result;
  result.grid_rows = grid.alpha_minus.size();
  result.grid_cols = grid.alpha_plus.size();
  for (auto& s : slots) {
    for (auto& rec : s) result.replicates.push_back(std::move(rec));
  }
  result.status.replicates = cfg.replicates;
  result.status.failed = count_failed_replicates(result.replicates);

  for (double am : grid.alpha_minus) {
    for (double ap : grid.alpha_plus) {
      for (const std::string metric : {"rate", "value"}) {
        for (Method m : cfg.methods) {
          const std::string name(to_string(m));
          std::vector<double> v;
          for (const auto& rec : result.replicates) {
            if (rec.ok && rec.method == name && rec.alpha_minus == am && rec.alpha_plus == ap) {
              v.push_back(metric == "rate" ? rec.rate : rec.value);
            }
          }
          const MeanSd ms = mean_sd(v);
          result.heatmap.push_back({am, ap, metric + "." + name, ms.mean, ms.sd});
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Train/test

namespace {

struct SplitWorld {
  Dataset data;
  InstrumentPropensity true_fz;
};

SplitWorld make_split_world(const RunConfig& cfg) {
  if (cfg.traintest.world == World::kOracle) {
    auto oracle = std::make_shared<DiscreteOracle>(cfg.traintest.oracle);
    Dataset data = oracle->sample(cfg.traintest.n, cfg.seed, 0);
    return {std::move(data),
            [oracle](int z, std::span<const double> x) { return oracle->instrument_prob(z, x[0]); }};
  }
  GenerativeConfig gen = cfg.generative;
  gen.n = cfg.traintest.n;
  Dataset data = generate_trial(gen, cfg.seed, 0).data;
  const std::vector<double> coef = gen.instrument_coef;
  return {std::move(data), [coef](int z, std::span<const double> x) {
            const double p = expit(coef[0] + dot(std::span(coef).subspan(1), x));
            return z > 0 ? p : 1.0 - p;
          }};
}

/// Intercepts that make the implied complier share match p_s4 on `train`.
SensitivityParams calibrated_params(const Dataset& train, double p_s4, double am, double ap,
                                    OutcomeFamily family) {
  SensitivityParams params = SensitivityParams::y_only(am, ap);
  for (int z : {-1, 1}) {
    std::size_t arm = 0, comply = 0;
    std::vector<double> ys;
    for (const auto& obs : train) {
      if (obs.z != z) continue;
      ++arm;
      if (obs.a == z) {
        ++comply;
        ys.push_back(obs.y);
      }
    }
    if (comply == 0) throw std::invalid_argument("calibration: an arm has no A = Z rows");
    const double p_comply = static_cast<double>(comply) / static_cast<double>(arm);
    const double a_y = params.arm(z).aY;
    if (family == OutcomeFamily::kBinary) {
      const double p_plus = static_cast<double>(std::count(ys.begin(), ys.end(), 1.0)) /
                            static_cast<double>(ys.size());
      params.arm(z).a0 = solve_alpha0(p_s4, p_comply, BinaryOutcome{p_plus}, a_y);
    } else {
      params.arm(z).a0 = solve_alpha0(p_s4, p_comply, ys, a_y);
    }
  }
  return params;
}

}  // namespace

TrainTestResult run_train_test(const RunConfig& cfg) {
  check_methods(cfg.methods);
  if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::kMr) == cfg.methods.end()) {
    throw std::invalid_argument("traintest compares against MR, which must be in methods");
  }
  const SplitWorld world = make_split_world(cfg);
  NuisanceOptions options = cfg.nuisance;
  if (cfg.traintest.world == World::kOracle) options.outcome_family = OutcomeFamily::kBinary;
  const NuisanceMasks masks = full_masks(world.data.dim_x());
  const auto& grid = cfg.sweep;
  const std::size_t n = world.data.size();
  const auto n_train = static_cast<std::size_t>(std::lround(cfg.traintest.split_ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) throw std::invalid_argument("split leaves an empty part");

  std::vector<std::vector<TrainTestRecord>> slots(cfg.replicates);
  parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    auto& out = slots[r];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng(cfg.seed, r, Stream::kSplit);
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[split_rng.next_u64() % (i + 1)]);
    }
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::optional<Dataset> train, test;
    std::optional<NuisanceSet> ns;
    std::string setup_error;
    try {
      train = world.data.subset(train_idx);
      test = world.data.subset(test_idx);
      Rng mc(cfg.seed, r, Stream::kMonteCarlo);
      ns = NuisanceSet::fit(*train, masks, options, mc);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    std::map<Method, std::pair<std::optional<LinearPolicy>, std::string>> invariant;

    for (double am : grid.alpha_minus) {
      for (double ap : grid.alpha_plus) {
        std::vector<TrainTestRecord> cell;
        for (Method m : cfg.methods) {
          TrainTestRecord rec;
          rec.resample = r;
          rec.alpha_minus = am;
          rec.alpha_plus = ap;
          rec.method = std::string(to_string(m));
          cell.push_back(std::move(rec));
        }
        auto fail_all = [&](const std::string& msg) {
          for (auto& rec : cell) {
            rec.ok = false;
            rec.error = msg;
          }
        };
        if (!setup_error.empty()) {
          fail_all(setup_error);
        } else {
          try {
            const SensitivityParams params =
                cfg.traintest.calibrate_p_s4
                    ? calibrated_params(*train, *cfg.traintest.calibrate_p_s4, am, ap, options.outcome_family)
                    : SensitivityParams::y_only(am, ap, grid.a0_minus, grid.a0_plus);
            const NuisanceTable train_table = tabulate(*ns, *train, params);
            const NuisanceTable test_table = tabulate(*ns, *test, params);
            for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
              const Method m = cfg.methods[k];
              try {
                LinearPolicy policy;
                if (m == Method::kOwl || m == Method::kIvt) {
                  auto& cached = invariant[m];
                  if (!cached.first && cached.second.empty()) {
                    try {
                      cached.first = learn(m, *train, train_table, params, cfg).policy;
                    } catch (const std::exception& e) {
                      cached.second = e.what();
                    }
                  }
                  if (!cached.first) throw std::runtime_error(cached.second);
                  policy = *cached.first;
                } else {
                  policy = learn(m, *train, train_table, params, cfg).policy;
                }
                const EstimateWithSE est = mr_value_known_fz(*test, policy, test_table, params, world.true_fz);
                cell[k].estimate = est.estimate;
                cell[k].se = est.se;
              } catch (const std::exception& e) {
                cell[k].ok = false;
                cell[k].error = e.what();
              }
            }
          } catch (const std::exception& e) {
            fail_all(e.what());
          }
        }
        const auto mr_it = std::find_if(cell.begin(), cell.end(), [](const auto& c) { return c.method == "MR"; });
        for (auto& rec : cell) {
          if (mr_it->ok && rec.ok) {
            rec.d_vs_mr = mr_it->estimate - rec.estimate;
          } else {
            rec.d_vs_mr = std::numeric_limits<double>::quiet_NaN();
          }
          out.push_back(std::move(rec));
        }
      }
    }
  });

  TrainTestResult result;
  for (auto& s : slots) {
    for (auto& rec : s) result.records.push_back(std::move(rec));
  }
  result.status.replicates = cfg.replicates;
  std::map<std::size_t, bool> failed;
  for (const auto& rec : result.records) failed[rec.resample] = failed[rec.resample] || !rec.ok;
  result.status.failed = static_cast<std::size_t>(
      std::count_if(failed.begin(), failed.end(), [](const auto& kv) { return kv.second; }));

  for (double am : grid.alpha_minus) {
    for (double ap : grid.alpha_plus) {
      for (Method m : cfg.methods) {
        const std::string name(to_string(m));
        std::vector<double> est, d;
        for (const auto& rec : result.records) {
          if (rec.ok && rec.method == name && rec.alpha_minus == am && rec.alpha_plus == ap) {
            est.push_back(rec.estimate);
            if (!std::isnan(rec.d_vs_mr)) d.push_back(rec.d_vs_mr);
          }
        }
        const MeanSd es = mean_sd(est), ds = mean_sd(d);
        TrainTestSummary row;
        row.alpha_minus = am;
        row.alpha_plus = ap;
        row.method = name;
        row.mean = es.mean;
        row.se = est.empty() ? es.sd : es.sd / std::sqrt(static_cast<double>(est.size()));
        row.d_mean = ds.mean;
        row.d_se = d.empty() ? ds.sd : ds.sd / std::sqrt(static_cast<double>(d.size()));
        row.n_ok = est.size();
        result.summary.push_back(row);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Oracle checks

std::vector<OracleCheck> run_oracle_checks(const OracleSpec& spec, double tol) {
  const DiscreteOracle oracle(spec);
  const SensitivityParams& params = oracle.truth();
  std::vector<OracleCheck> out;
  auto push = [&](std::string check, std::string policy, std::string corruption, double value,
                  double truth) {
    out.push_back({std::move(check), std::move(policy), std::move(corruption), value, truth,
                   std::abs(value - truth) < tol});
  };
  const std::vector<std::pair<std::string, unsigned>> value_patterns{
      {"none", kCorruptNone},
      {"Q+kappa", kCorruptQ | kCorruptKappa},
      {"Q+fZ", kCorruptQ | kCorruptFz},
      {"fA+kappa", kCorruptFa | kCorruptKappa}};
  for (const auto& policy : DiscreteOracle::threshold_policies()) {
    const std::string name = fmt::format("{};{}", format_number(policy.beta0), format_number(policy.beta[0]));
    const double truth = oracle.complier_value(policy);
    const double identified = oracle.expectation([&](const Observation& obs, const RowNuisance& nu) {
      return policy_decide(policy, obs.x) == obs.z ? ipw_weight(obs, nu, params) : 0.0;
    });
    push("identification", name, "none", identified, truth);
    for (const auto& [label, mask] : value_patterns) {
      const double v = oracle.expectation(
          [&](const Observation& obs, const RowNuisance& nu) {
            return mr_value_row(obs, nu, params, policy_decide(policy, obs.x));
          },
          mask);
      push("value_mr", name, label, v, truth);
    }
  }
  const double blip_truth = oracle.complier_blip();
  const std::vector<std::pair<std::string, unsigned>> blip_patterns{
      {"none", kCorruptNone}, {"fZ+fA", kCorruptFz | kCorruptFa}, {"Q", kCorruptQ}};
  for (const auto& [label, mask] : blip_patterns) {
    const double v = oracle.expectation(
        [&](const Observation& obs, const RowNuisance& nu) { return psi_mr_row(obs, nu, params); }, mask);
    push("blip_mr", "-", label, v, blip_truth);
  }
  return out;
}

void write_oracle_checks_csv(std::ostream& out, const std::vector<OracleCheck>& checks) {
  out << "check,policy,corruption,value,truth,abs_diff,pass\n";
  for (const auto& c : checks) {
    out << fmt::format("{},{},{},{:.15g},{:.15g},{:.3g},{}\n", c.check, c.policy, c.corruption, c.value,
                       c.truth, std::abs(c.value - c.truth), c.pass ? "true" : "false");
  }
}

// ---------------------------------------------------------------------------
// CSV output

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records) {
  out << "replicate,seed,method,scenario,alpha_minus,alpha_plus,rate,value,lambda,status\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.replicate, r.seed, r.method, r.scenario,
                       format_number(r.alpha_minus), format_number(r.alpha_plus),
                       r.ok ? format_number(r.rate) : "nan", r.ok ? format_number(r.value) : "nan",
                       format_number(r.lambda), r.ok ? "ok" : "failed");
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,scenario,metric,mean,sd,n_ok,n_failed\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.method, r.scenario, r.metric, format_number(r.mean),
                       format_number(r.sd), r.n_ok, r.n_failed);
  }
}

void write_values_csv(std::ostream& out, const std::vector<ValueRecord>& rows) {
  out << "method,alpha_minus,alpha_plus,scenario,estimate,se,n,seed\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.method, format_number(r.alpha_minus),
                       format_number(r.alpha_plus), r.scenario, format_number(r.estimate),
                       format_number(r.se), r.n, r.seed);
  }
}

void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells) {
  out << "alpha_minus,alpha_plus,metric,mean,sd\n";
  for (const auto& c : cells) {
    out << fmt::format("{},{},{},{},{}\n", format_number(c.alpha_minus), format_number(c.alpha_plus),
                       c.metric, format_number(c.mean), format_number(c.sd));
  }
}

void write_train_test_csv(std::ostream& out, const std::vector<TrainTestRecord>& records) {
  out << "resample,alpha_minus,alpha_plus,method,estimate,se,d_vs_mr,status\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.resample, format_number(r.alpha_minus),
                       format_number(r.alpha_plus), r.method, r.ok ? format_number(r.estimate) : "nan",
                       r.ok ? format_number(r.se) : "nan", format_number(r.d_vs_mr),
                       r.ok ? "ok" : "failed");
  }
}

void write_train_test_summary_csv(std::ostream& out, const std::vector<TrainTestSummary>& rows) {
  out << "alpha_minus,alpha_plus,method,mean,se,d_mean,d_se,n_ok\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", format_number(r.alpha_minus),
                       format_number(r.alpha_plus), r.method, format_number(r.mean), format_number(r.se),
                       format_number(r.d_mean), format_number(r.d_se), r.n_ok);
  }
}

void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  open_and_write(dir / "replicates.csv", [&](std::ostream& o) { write_replicates_csv(o, result.replicates); });
  open_and_write(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result.summary); });
  if (!result.values.empty()) {
    open_and_write(dir / "value_estimates.csv", [&](std::ostream& o) { write_values_csv(o, result.values); });
  }
}

void write_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  open_and_write(dir / "replicates.csv", [&](std::ostream& o) { write_replicates_csv(o, result.replicates); });
  open_and_write(dir / "heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(o, result.heatmap); });
}

void write_outputs(const TrainTestResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  open_and_write(dir / "traintest.csv", [&](std::ostream& o) { write_train_test_csv(o, result.records); });
  open_and_write(dir / "traintest_summary.csv",
                 [&](std::ostream& o) { write_train_test_summary_csv(o, result.summary); });
}

}  // namespace otrsens
