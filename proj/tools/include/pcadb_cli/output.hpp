#pragma once

// Machine-readable records. CSV numbers use %.17g; JSON numbers use the
// shortest representation that round-trips to the same double. NaN is an
// empty CSV field and a JSON null.
//
// Summary columns (simulate):
//   scenario, status, estimator, family, n, r, reps, failures, failure_rate,
//   degenerate, true_value, sigma_true, effective_rank, mean_error, std_error,
//   mean_standardized, std_error_standardized, ks_to_normal, ks_feasible,
//   coverage, risk, mean_sigma_hat, mean_m, floor_rate, clamp_rate, warnings,
//   error
// Replicate columns (simulate --replicates):
//   scenario, index, status, estimate, aligned_error, standardized,
//   feasible_standardized, sigma_hat, ci_covers, d_check, floor_engaged,
//   clamped, m, failure
// Bias curve columns (bias-curve):
//   effective_rank, tail_dim, b_hat, b_std_error, theoretical,
//   plugin_mean_error, plugin_std_error, debiased_mean_error,
//   debiased_std_error

#include "pcadb/estimators.hpp"
#include "pcadb/lowerbound.hpp"
#include "pcadb/montecarlo.hpp"
#include "pcadb_cli/config.hpp"

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pcadb::cli {

// Outcome of one scenario inside a run; exactly one of report / error.
struct ScenarioOutcome {
  Scenario scenario;
  std::optional<SummaryReport> report;
  std::optional<std::string> error;
};

std::string csv_number(double v);
std::string csv_field(const std::string& s);

void write_summaries(std::ostream& os, Format f, std::span<const ScenarioOutcome> outcomes);
void write_replicates_csv(std::ostream& os, const std::string& scenario,
                          std::span<const ReplicateResult> results, bool header);
void write_bias_curve(std::ostream& os, Format f, std::span<const BiasCurvePoint> curve);

struct EstimateRecord {
  std::string estimator;
  int n = 0;
  int dim = 0;
  int r = 0;
  double value = 0.0;
  double sigma_hat = 0.0;
  double alpha = 0.0;
  Interval ci;
  double tau = 0.0;
  std::optional<double> delta;
  std::optional<double> d_check;
  std::optional<int> n_prime;
  std::optional<int> m;
  std::optional<double> r_hat;
  std::optional<bool> clamped;
  std::optional<bool> floor_engaged;
};

void write_estimate(std::ostream& os, Format f, const EstimateRecord& rec);

struct LowerBoundRecord {
  double n = 0.0;
  double c = 0.0;
  VanTreesResult result;
  std::optional<double> integral_bound;
};

void write_lowerbound(std::ostream& os, Format f, const LowerBoundRecord& rec);

}  // namespace pcadb::cli
