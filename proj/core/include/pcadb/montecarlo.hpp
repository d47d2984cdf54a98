#pragma once

// Replicated experiments: scenarios, deterministic parallel replication and
// the evaluation statistics (KS distance to Phi, coverage, risk, bias curves).

#include "pcadb/estimators.hpp"
#include "pcadb/sampling.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcadb {

// Either explicit coordinates or a named construction: "e<k>" (k-th
// standard basis vector), "theta<i>" or "theta<i>+theta<j>" (normalized sum
// of population eigenvectors). Indices are 1-based.
struct FunctionalSpec {
  std::vector<double> coords;
  std::string named;

  bool operator==(const FunctionalSpec&) const = default;
};

Vector resolve_functional(const FunctionalSpec& spec, const SpectralDecomposition& dec);

enum class EstimatorKind { kPlugin, kDebiased };

std::string estimator_name(EstimatorKind kind);

struct Scenario {
  std::string name = "scenario";
  ModelSpec model = Prop32Spec{};
  int r = 1;
  FunctionalSpec u{{}, "e1"};
  int n = 100;
  double tau = kDefaultTau;
  std::optional<int> m;
  EstimatorKind estimator = EstimatorKind::kDebiased;
  int reps = 100;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  Loss loss = Loss::squared();

  bool operator==(const Scenario&) const = default;
};

// Throws ValidationError when reps < 2, n is too small, alpha or tau are
// out of range. Model validity is checked when the scenario runs.
void validate_scenario(const Scenario& s);

struct ReplicateResult {
  int index = 0;
  std::optional<std::string> failure;  // set instead of the estimate fields
  double estimate = 0.0;               // aligned to the true eigenvector
  double aligned_error = 0.0;          // estimate - <theta_r, u>
  double standardized = 0.0;           // sqrt(n) error / sigma_r(Sigma; u)
  double feasible_standardized = 0.0;  // sqrt(n) error / sigma_r(Sigma_hat; u)
  double sigma_hat = 0.0;
  bool ci_covers = false;
  double d_check = 0.0;  // debiased only
  bool floor_engaged = false;
  bool clamped = false;
  int m = 0;
};

struct SummaryReport {
  std::string scenario;
  std::string estimator;
  int reps = 0;
  int failures = 0;
  double failure_rate = 0.0;
  bool degenerate = false;
  double true_value = 0.0;  // <theta_r, u>
  double sigma_true = 0.0;  // sigma_r(Sigma; u)
  double effective_rank = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_standardized = 0.0;
  double std_error_standardized = 0.0;
  double ks_to_normal = 0.0;
  double ks_feasible = 0.0;
  double coverage = 0.0;
  double risk = 0.0;
  double mean_sigma_hat = 0.0;
  double mean_m = 0.0;
  double floor_rate = 0.0;
  double clamp_rate = 0.0;
  std::vector<std::string> warnings;
  double wall_time = 0.0;  // seconds; excluded from determinism
};

// Replicate i draws with seed_derive(master_seed, i). Cluster and
// estimation failures are recorded on the replicate; other errors propagate.
std::vector<ReplicateResult> run_replicates(const Scenario& s, int jobs = 0);
SummaryReport summarize(const Scenario& s, std::span<const ReplicateResult> results);
SummaryReport run_scenario(const Scenario& s, int jobs = 0);

// sup_x |F_hat(x) - Phi(x)| over the sample.
double ks_distance(std::span<const double> sample);

// Empirical Levy-type distance between paired samples:
// inf { d >= 0 : #{i : |xi_i - eta_i| >= d} / k <= d }.
double paired_distance(std::span<const double> xi, std::span<const double> eta);

// Fraction of non-failed replicates whose interval covers the truth.
double coverage(std::span<const ReplicateResult> results);
// Mean loss of the oracle-standardized statistic over non-failed replicates.
double risk(std::span<const ReplicateResult> results, const Loss& loss);

struct BiasCurvePoint {
  double effective_rank = 0.0;
  int tail_dim = 0;
  double b_hat = 0.0;
  double b_std_error = 0.0;
  double theoretical = 0.0;  // -A_r / (2n)
  std::optional<double> plugin_mean_error;
  std::optional<double> plugin_std_error;
  std::optional<double> debiased_mean_error;
  std::optional<double> debiased_std_error;
};

struct BiasSweepOptions {
  int oracle_reps = 1000;
  int estimator_reps = 0;  // 0 skips the plug-in and debiased runs
};

// Tail dimension giving the prop32 family the requested effective rank,
// rounded to the nearest integer (at least 1).
int tail_dim_for_rank(int r, double a, double target_rank);

// The base scenario must use a prop32 model; each grid entry replaces its
// tail dimension. Point p uses seed_derive(master_seed, p).
std::vector<BiasCurvePoint> bias_sweep(const Scenario& base, const std::vector<double>& rank_grid,
                                       const BiasSweepOptions& options, int jobs = 0);

}  // namespace pcadb
