#pragma once

// Estimators of linear functionals <theta_r, u> of a principal component:
// the plug-in <theta_hat_r^delta, u>, the three-split debiased estimator
// theta_check_r = theta_hat^1 / (d_check_r v 1/2), the variance
// sigma_r^2(Sigma; u) = mu_r <Sigma C_r u, C_r u> and normal intervals.

#include "pcadb/cluster.hpp"
#include "pcadb/sampling.hpp"
#include "pcadb/spectral.hpp"

#include <optional>
#include <string>

namespace pcadb {

// sigma_r^2(Sigma; u), evaluated both as mu_r <Sigma C_r u, C_r u> and as
// 1/2 ||Sigma^{1/2} D Sigma^{1/2}||_2^2 with D = theta_r (x) C_r u + C_r u (x) theta_r.
// Disagreement beyond 1e-10 relative throws NumericalError.
double variance_true(const SpectralDecomposition& dec, int r, const Vector& u);

// sigma_r(Sigma_hat; u) for the sample covariance of `samples`.
double variance_estimate(const SampleSet& samples, int r, const Vector& u);
double variance_estimate(const SymMatrix& sigma_hat, int r, const Vector& u);

struct PluginEstimate {
  double value = 0.0;
  Vector theta_hat;
  double delta = 0.0;
  int r = 0;
  IndexRange cluster;
};

PluginEstimate plugin_estimate(const SampleSet& samples, int r, double tau, const Vector& u);
// Same, from an already decomposed Sigma_hat.
PluginEstimate plugin_estimate(const SpectralDecomposition& sigma_hat, int r, double tau,
                               const Vector& u);

struct SplitSizes {
  int n_prime = 0;
  int m = 0;
  bool clamped = false;  // the raw rule fell outside [4, floor(n/4)]
};

// m = clamp(ceil(n^{3/4} r_hat^{1/4}), 4, floor(n/4)), n' = n - 2m.
SplitSizes split_sizes(int n, double r_hat);

struct DebiasFactor {
  double value = 0.0;
  bool floor_engaged = false;  // <t2, t3> < 1/16
};

inline constexpr double kDebiasFloor = 1.0 / 16.0;

// <t1, t2> / sqrt(max(<t2, t3>, 1/16)).
DebiasFactor debias_factor(const Vector& t1, const Vector& t2, const Vector& t3);

struct DebiasedEstimate {
  double value = 0.0;
  Vector theta_check;
  double d_check = 0.0;
  int n_prime = 0;
  int m = 0;
  double sigma_hat = 0.0;
  bool clamped = false;        // d_check < 1/2, so theta_check = 2 theta_hat^1
  bool floor_engaged = false;  // debias_factor floor used
  double r_hat = 0.0;          // effective rank of the full-sample Sigma_hat
  Vector theta_hat1;           // unclamped first-subsample eigenvector
};

// Subsample 1 is rows [0, n'), subsamples 2 and 3 the next two m-blocks.
// Without `m`, split_sizes(n, r(Sigma_hat)) on the full sample decides.
// Cluster failures on a subsample surface as EstimationError(subsample).
DebiasedEstimate debiased_estimate(const SampleSet& samples, int r, double tau, const Vector& u,
                                   std::optional<int> m = std::nullopt);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

// value -/+ z_{1 - alpha/2} sigma_hat / sqrt(n).
Interval confidence_interval(double value, double sigma_hat, int n, double alpha);

struct VariancePerturbation {
  double lhs = 0.0;        // |sigma_r^2(Sigma + E; u) - sigma_r^2(Sigma; u)|
  double rhs_shape = 0.0;  // ||Sigma||^2 / g_r^2 * ||E|| / g_r * ||u||^2
};

// Requires ||E|| <= g_r / 4 (ValidationError otherwise).
VariancePerturbation variance_perturbation_check(const SpectralDecomposition& dec, int r,
                                                 const Vector& u, const SymMatrix& e);

// Even losses with l(0) = 0, convex and nondecreasing on [0, inf), bounded by
// c1 exp(c2 x) on [0, inf).
struct Loss {
  enum class Kind { kSquared, kAbsolute, kHuber };

  Kind kind = Kind::kSquared;
  double k = 1.0;  // Huber threshold

  static Loss squared() { return {Kind::kSquared, 1.0}; }
  static Loss absolute() { return {Kind::kAbsolute, 1.0}; }
  static Loss huber(double k);

  double operator()(double x) const;
  double c1() const { return 1.0; }
  double c2() const { return 1.0; }
  std::string name() const;

  bool operator==(const Loss&) const = default;
};

// "squared", "absolute" or "huber(<k>)".
Loss parse_loss(const std::string& text);

}  // namespace pcadb
