#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "otrsens/config.hpp"

namespace otrsens {

/// Runs fn(i) for i in [0, count) on `jobs` worker threads. Items are claimed
/// from an atomic counter, so fn must only write to per-item state.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string scenario;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double rate = 0.0;
  double value = 0.0;
  double lambda = 0.0;
  bool ok = true;
  std::string error;
};

struct ValueRecord {
  std::size_t replicate = 0;
  std::string method;  // IPW, MR or TRUTH
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  std::string scenario;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct SummaryRow {
  std::string method;
  std::string scenario;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct HeatmapCell {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  std::string metric;  // e.g. rate.MR, value.IPW
  double mean = 0.0;
  double sd = 0.0;
};

struct RunStatus {
  std::size_t replicates = 0;
  std::size_t failed = 0;
  /// A run is invalid when more than 5% of replicates failed.
  bool valid() const { return failed * 20 <= replicates; }
};

struct ScenarioResult {
  std::vector<ReplicateRecord> replicates;
  std::vector<ValueRecord> values;
  std::vector<SummaryRow> summary;
  RunStatus status;
};

struct SweepResult {
  std::vector<ReplicateRecord> replicates;
  std::vector<HeatmapCell> heatmap;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  RunStatus status;
};

struct TrainTestRecord {
  std::size_t resample = 0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  std::string method;
  double estimate = 0.0;
  double se = 0.0;
  /// Estimated value of the MR policy minus that of this method's policy,
  /// both on the same test split.
  double d_vs_mr = 0.0;
  bool ok = true;
  std::string error;
};

struct TrainTestSummary {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  std::string method;
  double mean = 0.0;
  double se = 0.0;
  double d_mean = 0.0;
  double d_se = 0.0;
  std::size_t n_ok = 0;
};

struct TrainTestResult {
  std::vector<TrainTestRecord> records;
  std::vector<TrainTestSummary> summary;
  RunStatus status;
};

/// Simulates `replicates` trials, learns a policy per method and scores it
/// against the hidden truth. Value estimators run when the scenario asks.
ScenarioResult run_scenario(const RunConfig& cfg);

/// Fixes the generative truth and varies the analysis outcome slopes over
/// the configured grid. Nuisances are fitted once per replicate.
SweepResult run_sweep(const RunConfig& cfg);

/// Repeated train/test splits of one dataset per resample; test-split values
/// come from the known-propensity MR estimator.
TrainTestResult run_train_test(const RunConfig& cfg);

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_values_csv(std::ostream& out, const std::vector<ValueRecord>& rows);
void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells);
void write_train_test_csv(std::ostream& out, const std::vector<TrainTestRecord>& records);
void write_train_test_summary_csv(std::ostream& out, const std::vector<TrainTestSummary>& rows);

/// One exact check on the enumerable oracle world.
struct OracleCheck {
  std::string check;       // identification, value_mr or blip_mr
  std::string policy;      // "beta0;beta1", or "-" for the blip
  std::string corruption;  // none, Q+kappa, Q+fZ, fA+kappa, fZ+fA, Q
  double value = 0.0;
  double truth = 0.0;
  bool pass = false;
};

/// Enumerated identification and robustness checks at tolerance `tol`.
std::vector<OracleCheck> run_oracle_checks(const OracleSpec& spec, double tol = 1e-9);
void write_oracle_checks_csv(std::ostream& out, const std::vector<OracleCheck>& checks);

/// Writes every table of the result into `dir` (created if needed).
void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir);
void write_outputs(const SweepResult& result, const std::filesystem::path& dir);
void write_outputs(const TrainTestResult& result, const std::filesystem::path& dir);

/// Formats a double the way every CSV table does.
std::string format_number(double v);

}  // namespace otrsens
