#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otrsens/datagen.hpp"
#include "otrsens/model.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/oracle.hpp"
#include "otrsens/policy_learner.hpp"
#include "otrsens/sensitivity.hpp"
#include "otrsens/weights.hpp"

namespace otrsens {

/// A named binding of misspecification masks to a scenario. Presets:
///   CASE1..CASE3          classification weights: all correct,
///                         f(A,Z|X) misspecified, Q misspecified
///   VALUE_CASE1..VALUE_CASE4  value estimators: all correct,
///                         f(Z|X), f(A|Z,X), Q misspecified
/// A misspecified compliance model drops the covariates and pools the two
/// arms, i.e. it is the marginal law of A.
struct ScenarioSpec {
  std::string id = "CASE1";
  NuisanceMasks masks;
  bool estimate_values = false;
};

ScenarioSpec scenario_preset(const std::string& id, std::size_t dim_x);
std::vector<std::string> scenario_preset_names();

struct SweepGrid {
  std::vector<double> alpha_minus{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> alpha_plus{-1.0, -0.5, 0.0, 0.5, 1.0};
  double a0_minus = 0.0;
  double a0_plus = 0.0;
};

enum class World { kGenerative, kOracle };

struct TrainTestConfig {
  double split_ratio = 0.6;
  /// When set, analysis intercepts are calibrated from p(S4) for every
  /// grid cell instead of taken from the grid.
  std::optional<double> calibrate_p_s4;
  World world = World::kOracle;
  OracleSpec oracle;
  std::size_t n = 600;
};

struct RunConfig {
  std::uint64_t seed = 20240601;
  std::size_t replicates = 100;
  std::size_t jobs = 1;
  std::vector<Method> methods{Method::kOwl, Method::kIvt, Method::kIpw, Method::kMr};
  ScenarioSpec scenario;
  GenerativeConfig generative;
  std::optional<SensitivityParams> analysis;  // defaults to the truth
  LearnerConfig learner;
  bool cross_validate_lambda = false;
  NuisanceOptions nuisance;
  std::size_t truth_points = 20000;
  TruthPopulation truth_population = TruthPopulation::kCovariateMarginal;
  Method value_policy = Method::kIpw;
  BaselinePropensity baseline_propensity = BaselinePropensity::kMarginal;
  SweepGrid sweep;
  TrainTestConfig traintest;
  /// Optional dataset path for `fit`.
  std::optional<std::filesystem::path> data_path;

  const SensitivityParams& analysis_params() const {
    return analysis ? *analysis : generative.truth;
  }
};

/// Parses a JSON document; unknown keys are rejected so typos surface.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Parses the `{"form":..., "alpha":{"minus":{...},"plus":{...}}}` block.
SensitivityParams parse_sensitivity(const std::string& json_text);

}  // namespace otrsens
