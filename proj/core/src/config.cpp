#include "otrsens/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace otrsens {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

ArmAlpha parse_arm(const json& j) {
  reject_unknown(j, {"a0", "aX", "aY", "a_pca"}, "alpha arm");
  ArmAlpha a;
  a.a0 = j.value("a0", 0.0);
  a.aY = j.value("aY", 0.0);
  a.a_pca = j.value("a_pca", 0.0);
  if (j.contains("aX")) a.aX = j.at("aX").get<std::vector<double>>();
  return a;
}

SensitivityParams parse_sensitivity_json(const json& j) {
  reject_unknown(j, {"form", "alpha"}, "sensitivity block");
  SensitivityParams p;
  p.form = sensitivity_form_from_string(j.value("form", std::string("Y_ONLY")));
  if (j.contains("alpha")) {
    const json& a = j.at("alpha");
    reject_unknown(a, {"minus", "plus"}, "alpha");
    if (a.contains("minus")) p.minus = parse_arm(a.at("minus"));
    if (a.contains("plus")) p.plus = parse_arm(a.at("plus"));
  }
  return p;
}

CovariateMask parse_mask(const json& j) { return j.get<std::vector<std::size_t>>(); }

}  // namespace

std::vector<std::string> scenario_preset_names() {
  return {"CASE1", "CASE2", "CASE3", "VALUE_CASE1", "VALUE_CASE2", "VALUE_CASE3", "VALUE_CASE4"};
}

ScenarioSpec scenario_preset(const std::string& id, std::size_t dim_x) {
  ScenarioSpec s;
  s.id = id;
  s.masks = full_masks(dim_x);
  if (id == "CASE1") {
  } else if (id == "CASE2") {
    s.masks.fz.clear();
    s.masks.fa.clear();
    s.masks.fa_pool_arms = true;
  } else if (id == "CASE3") {
    s.masks.q.clear();
  } else if (id == "VALUE_CASE1") {
    s.estimate_values = true;
  } else if (id == "VALUE_CASE2") {
    s.masks.fz.clear();
    s.estimate_values = true;
  } else if (id == "VALUE_CASE3") {
    s.masks.fa.clear();
    s.masks.fa_pool_arms = true;
    s.estimate_values = true;
  } else if (id == "VALUE_CASE4") {
    s.masks.q.clear();
    s.estimate_values = true;
  } else {
    throw std::invalid_argument(fmt::format("unknown scenario '{}'", id));
  }
  return s;
}

SensitivityParams parse_sensitivity(const std::string& json_text) {
  return parse_sensitivity_json(json::parse(json_text));
}

RunConfig parse_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  reject_unknown(j,
                 {"seed", "replicates", "jobs", "n", "methods", "scenario", "misspec", "truth",
                  "analysis", "learner", "nuisance", "truth_points", "truth_population",
                  "value_policy", "sweep", "traintest", "rejection_mode", "data",
                  "estimate_values", "baseline_propensity", "comment"},
                 "config");
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.replicates = j.value("replicates", c.replicates);
  c.jobs = j.value("jobs", c.jobs);
  c.generative.n = j.value("n", c.generative.n);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
  }
  c.scenario = scenario_preset(j.value("scenario", std::string("CASE1")), c.generative.dim_x);
  if (j.contains("misspec")) {
    const json& m = j.at("misspec");
    reject_unknown(m, {"fZ", "fA", "Q", "fA_pool_arms"}, "misspec");
    if (m.contains("fZ")) c.scenario.masks.fz = parse_mask(m.at("fZ"));
    if (m.contains("fA")) c.scenario.masks.fa = parse_mask(m.at("fA"));
    if (m.contains("Q")) c.scenario.masks.q = parse_mask(m.at("Q"));
    c.scenario.masks.fa_pool_arms = m.value("fA_pool_arms", c.scenario.masks.fa_pool_arms);
  }
  c.scenario.estimate_values = j.value("estimate_values", c.scenario.estimate_values);
  if (j.contains("truth")) c.generative.truth = parse_sensitivity_json(j.at("truth"));
  if (j.contains("analysis")) c.analysis = parse_sensitivity_json(j.at("analysis"));
  if (j.contains("rejection_mode")) {
    const auto mode = j.at("rejection_mode").get<std::string>();
    if (mode == "first_accept") {
      c.generative.rejection_mode = RejectionMode::kFirstAccept;
    } else if (mode == "mean_of_accepted") {
      c.generative.rejection_mode = RejectionMode::kMeanOfAccepted;
    } else {
      throw std::invalid_argument(fmt::format("unknown rejection_mode '{}'", mode));
    }
  }
  if (j.contains("learner")) {
    const json& l = j.at("learner");
    reject_unknown(l, {"lambda", "max_iter", "tolerance", "step_scale", "lambda_grid", "cv_folds",
                       "cross_validate"},
                   "learner");
    c.learner.lambda = l.value("lambda", c.learner.lambda);
    c.learner.max_iter = l.value("max_iter", c.learner.max_iter);
    c.learner.tolerance = l.value("tolerance", c.learner.tolerance);
    c.learner.step_scale = l.value("step_scale", c.learner.step_scale);
    if (l.contains("lambda_grid")) c.learner.lambda_grid = l.at("lambda_grid").get<std::vector<double>>();
    c.learner.cv_folds = l.value("cv_folds", c.learner.cv_folds);
    c.cross_validate_lambda = l.value("cross_validate", false);
  }
  if (j.contains("nuisance")) {
    const json& n = j.at("nuisance");
    reject_unknown(n, {"n_mc", "kappa_folds", "boosting", "outcome_family"}, "nuisance");
    c.nuisance.n_mc = n.value("n_mc", c.nuisance.n_mc);
    c.nuisance.kappa_folds = n.value("kappa_folds", c.nuisance.kappa_folds);
    if (n.contains("outcome_family")) {
      const auto f = n.at("outcome_family").get<std::string>();
      if (f == "normal") {
        c.nuisance.outcome_family = OutcomeFamily::kNormal;
      } else if (f == "binary") {
        c.nuisance.outcome_family = OutcomeFamily::kBinary;
      } else {
        throw std::invalid_argument(fmt::format("unknown outcome_family '{}'", f));
      }
    }
    if (n.contains("boosting")) {
      const json& b = n.at("boosting");
      reject_unknown(b, {"rounds", "learning_rate", "max_bins", "min_leaf"}, "boosting");
      auto& r = c.nuisance.kappa_regressor;
      r.rounds = b.value("rounds", r.rounds);
      r.learning_rate = b.value("learning_rate", r.learning_rate);
      r.max_bins = b.value("max_bins", r.max_bins);
      r.min_leaf = b.value("min_leaf", r.min_leaf);
    }
  }
  c.truth_points = j.value("truth_points", c.truth_points);
  if (j.contains("truth_population")) {
    const auto p = j.at("truth_population").get<std::string>();
    if (p == "marginal") {
      c.truth_population = TruthPopulation::kCovariateMarginal;
    } else if (p == "compliers") {
      c.truth_population = TruthPopulation::kCompliers;
    } else {
      throw std::invalid_argument(fmt::format("unknown truth_population '{}'", p));
    }
  }
  if (j.contains("value_policy")) {
    c.value_policy = method_from_string(j.at("value_policy").get<std::string>());
  }
  if (j.contains("baseline_propensity")) {
    const auto b = j.at("baseline_propensity").get<std::string>();
    if (b == "marginal") {
      c.baseline_propensity = BaselinePropensity::kMarginal;
    } else if (b == "model") {
      c.baseline_propensity = BaselinePropensity::kModel;
    } else {
      throw std::invalid_argument(fmt::format("unknown baseline_propensity '{}'", b));
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, {"alpha_minus", "alpha_plus", "a0_minus", "a0_plus"}, "sweep");
    if (s.contains("alpha_minus")) c.sweep.alpha_minus = s.at("alpha_minus").get<std::vector<double>>();
    if (s.contains("alpha_plus")) c.sweep.alpha_plus = s.at("alpha_plus").get<std::vector<double>>();
    c.sweep.a0_minus = s.value("a0_minus", c.sweep.a0_minus);
    c.sweep.a0_plus = s.value("a0_plus", c.sweep.a0_plus);
  }
  if (j.contains("traintest")) {
    const json& t = j.at("traintest");
    reject_unknown(t, {"split_ratio", "calibrate_p_s4", "world", "n", "oracle"}, "traintest");
    c.traintest.split_ratio = t.value("split_ratio", c.traintest.split_ratio);
    if (t.contains("calibrate_p_s4")) c.traintest.calibrate_p_s4 = t.at("calibrate_p_s4").get<double>();
    c.traintest.n = t.value("n", c.traintest.n);
    if (t.contains("world")) {
      const auto w = t.at("world").get<std::string>();
      if (w == "oracle") {
        c.traintest.world = World::kOracle;
      } else if (w == "generative") {
        c.traintest.world = World::kGenerative;
      } else {
        throw std::invalid_argument(fmt::format("unknown world '{}'", w));
      }
    }
    if (t.contains("oracle")) {
      const json& o = t.at("oracle");
      reject_unknown(o, {"pz_plus", "alpha_y", "p_s4", "q_cell", "q_other"}, "traintest.oracle");
      auto& spec = c.traintest.oracle;
      if (o.contains("pz_plus")) spec.pz_plus = o.at("pz_plus").get<std::array<double, 2>>();
      if (o.contains("alpha_y")) spec.alpha_y = o.at("alpha_y").get<std::array<double, 2>>();
      if (o.contains("p_s4")) spec.p_s4 = o.at("p_s4").get<std::array<double, 2>>();
      if (o.contains("q_cell")) spec.q_cell = o.at("q_cell").get<std::array<std::array<double, 2>, 2>>();
      if (o.contains("q_other")) spec.q_other = o.at("q_other").get<std::array<std::array<double, 2>, 4>>();
    }
  }
  if (j.contains("data")) c.data_path = j.at("data").get<std::string>();

  if (c.replicates == 0) throw std::invalid_argument("replicates must be positive");
  if (c.jobs == 0) throw std::invalid_argument("jobs must be positive");
  if (!(c.traintest.split_ratio > 0.0 && c.traintest.split_ratio < 1.0)) {
    throw std::invalid_argument("split_ratio must lie in (0,1)");
  }
  if (c.sweep.alpha_minus.empty() || c.sweep.alpha_plus.empty()) {
    throw std::invalid_argument("sweep grid must be nonempty");
  }
  c.learner.validate();
  c.generative.validate();
  c.analysis_params().validate(c.generative.dim_x);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("invalid config '{}': {}", path.string(), e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("invalid config '{}': {}", path.string(), e.what()));
  }
}

}  // namespace otrsens
