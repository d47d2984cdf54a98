#include "pcadb/montecarlo.hpp"

#include "pcadb/cluster.hpp"
#include "pcadb/errors.hpp"
#include "pcadb/normal.hpp"
#include "pcadb/perturbation.hpp"
#include "pcadb/replicate.hpp"
#include "pcadb/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

namespace pcadb {

namespace {

int parse_index(const std::string& digits, const char* what) {
  try {
    const int k = std::stoi(digits);
    if (k < 1) throw ValidationError("");
    return k;
  } catch (const std::exception&) {
    throw ValidationError(std::string("functional: bad index in '") + what + "'");
  }
}

void check_named(const std::string& named) {
  static const std::regex pattern(R"(e[0-9]+|theta[0-9]+(\+theta[0-9]+)?)");
  if (!std::regex_match(named, pattern)) {
    throw ValidationError("functional: unknown construction '" + named +
                          "' (expected e<k>, theta<i> or theta<i>+theta<j>)");
  }
}

Vector population_vector(const SpectralDecomposition& dec, int i) {
  if (i > dec.group_count()) {
    std::ostringstream os;
    os << "functional: theta" << i << " requested but the model has " << dec.group_count()
       << " distinct eigenvalues";
    throw ValidationError(os.str());
  }
  return dec.eigenvector(i);
}

}  // namespace

Vector resolve_functional(const FunctionalSpec& spec, const SpectralDecomposition& dec) {
  const int d = dec.dim();
  Vector u;
  if (!spec.named.empty()) {
    if (!spec.coords.empty()) throw ValidationError("functional: give either coordinates or a name");
    check_named(spec.named);
    const std::string& s = spec.named;
    if (s[0] == 'e') {
      const int k = parse_index(s.substr(1), s.c_str());
      if (k > d) {
        std::ostringstream os;
        os << "functional: " << s << " exceeds dimension " << d;
        throw ValidationError(os.str());
      }
      u = Vector::Unit(d, k - 1);
    } else {
      const auto plus = s.find('+');
      if (plus == std::string::npos) {
        u = population_vector(dec, parse_index(s.substr(5), s.c_str()));
      } else {
        const int i = parse_index(s.substr(5, plus - 5), s.c_str());
        const int j = parse_index(s.substr(plus + 6), s.c_str());
        if (i == j) throw ValidationError("functional: theta<i>+theta<j> needs i != j");
        u = (population_vector(dec, i) + population_vector(dec, j)) / std::numbers::sqrt2;
      }
    }
  } else {
    if (static_cast<int>(spec.coords.size()) != d) {
      std::ostringstream os;
      os << "functional: " << spec.coords.size() << " coordinates for dimension " << d;
      throw ValidationError(os.str());
    }
    u = Eigen::Map<const Vector>(spec.coords.data(), d);
  }
  if (!u.allFinite() || u.squaredNorm() == 0.0) throw ValidationError("functional: u must be nonzero and finite");
  return u;
}

std::string estimator_name(EstimatorKind kind) {
  return kind == EstimatorKind::kPlugin ? "plugin" : "debiased";
}

void validate_scenario(const Scenario& s) {
  if (s.reps < 2) throw ValidationError("reps must be >= 2");
  if (s.r < 1) throw ValidationError("r must be >= 1");
  if (s.estimator == EstimatorKind::kDebiased && s.n < 12) {
    throw ValidationError("n must be >= 12 for the debiased estimator");
  }
  if (s.n < 1) throw ValidationError("n must be >= 1");
  if (!(s.tau > 0.0 && s.tau < 2.0)) throw ValidationError("tau must lie in (0, 2)");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (s.m) {
    const int np = s.n - 2 * *s.m;
    if (*s.m < 1 || np <= 0 || 3 * np <= s.n) throw ValidationError("m must satisfy n - 2m > n/3");
  }
  if (s.u.named.empty()) {
    if (s.u.coords.empty()) throw ValidationError("u must be given");
    bool nonzero = false;
    for (double v : s.u.coords) {
      if (!std::isfinite(v)) throw ValidationError("u has a non-finite entry");
      nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw ValidationError("u must be nonzero");
  } else {
    if (!s.u.coords.empty()) throw ValidationError("u: give either coordinates or a name");
    check_named(s.u.named);
  }
}

namespace {

struct Prepared {
  CovarianceModel model;
  Vector u;
  Vector theta;
  double true_value = 0.0;
  double sigma_true = 0.0;
};

Prepared prepare(const Scenario& s) {
  validate_scenario(s);
  Prepared p;
  try {
    p.model = make_model(s.model);
    p.u = resolve_functional(s.u, p.model.dec());
    p.theta = p.model.dec().eigenvector(s.r);
    p.sigma_true = std::sqrt(variance_true(p.model.dec(), s.r, p.u));
  } catch (const Error& e) {
    throw ScenarioError("scenario '" + s.name + "': " + e.what());
  }
  if (!(p.sigma_true > 0.0)) {
    throw ScenarioError("scenario '" + s.name + "': sigma_r(Sigma; u) = 0, standardization undefined");
  }
  p.true_value = p.theta.dot(p.u);
  return p;
}

ReplicateResult run_one(const Scenario& s, const Prepared& p, int i) {
  ReplicateResult out;
  out.index = i;
  const SampleSet xs = draw(p.model, s.n, seed_derive(s.master_seed, static_cast<std::uint64_t>(i)));
  try {
    double value = 0.0;
    double orient = 0.0;
    if (s.estimator == EstimatorKind::kPlugin) {
      const SpectralDecomposition dec = decompose(sample_covariance(xs));
      const PluginEstimate pe = plugin_estimate(dec, s.r, s.tau, p.u);
      value = pe.value;
      orient = pe.theta_hat.dot(p.theta);
      out.sigma_hat = std::sqrt(std::max(variance_true(dec, s.r, p.u), 0.0));
    } else {
      const DebiasedEstimate de = debiased_estimate(xs, s.r, s.tau, p.u, s.m);
      value = de.value;
      orient = de.theta_hat1.dot(p.theta);
      out.sigma_hat = de.sigma_hat;
      out.d_check = de.d_check;
      out.floor_engaged = de.floor_engaged;
      out.clamped = de.clamped;
      out.m = de.m;
    }
    out.estimate = orient < 0.0 ? -value : value;
    out.aligned_error = out.estimate - p.true_value;
    const double root_n = std::sqrt(static_cast<double>(s.n));
    out.standardized = root_n * out.aligned_error / p.sigma_true;
    out.feasible_standardized = out.sigma_hat > 0.0
                                    ? root_n * out.aligned_error / out.sigma_hat
                                    : std::numeric_limits<double>::infinity();
    out.ci_covers = confidence_interval(out.estimate, out.sigma_hat, s.n, s.alpha).contains(p.true_value);
  } catch (const ClusterNotFoundError& e) {
    out = ReplicateResult{};
    out.index = i;
    out.failure = std::string("cluster: ") + e.what();
  } catch (const EstimationError& e) {
    out = ReplicateResult{};
    out.index = i;
    out.failure = std::string("estimation: ") + e.what();
  } catch (const MultiplicityError& e) {
    out = ReplicateResult{};
    out.index = i;
    out.failure = std::string("multiplicity: ") + e.what();
  }
  return out;
}

SummaryReport summarize_prepared(const Scenario& s, const Prepared& p,
                                 std::span<const ReplicateResult> results) {
  SummaryReport rep;
  rep.scenario = s.name;
  rep.estimator = estimator_name(s.estimator);
  rep.reps = static_cast<int>(results.size());
  rep.true_value = p.true_value;
  rep.sigma_true = p.sigma_true;
  rep.effective_rank = effective_rank(p.model.dec());

  std::vector<double> err, z, zf, sig, ms, floors, clamps;
  for (const auto& r : results) {
    if (r.failure) {
      ++rep.failures;
      continue;
    }
    err.push_back(r.aligned_error);
    z.push_back(r.standardized);
    zf.push_back(r.feasible_standardized);
    sig.push_back(r.sigma_hat);
    ms.push_back(static_cast<double>(r.m));
    floors.push_back(r.floor_engaged ? 1.0 : 0.0);
    clamps.push_back(r.clamped ? 1.0 : 0.0);
  }
  rep.failure_rate = rep.reps > 0 ? static_cast<double>(rep.failures) / rep.reps : 0.0;
  if (rep.failure_rate > 0.01) {
    std::ostringstream os;
    os << "failure rate " << rep.failure_rate << " exceeds 1%";
    rep.warnings.push_back(os.str());
  }
  if (err.empty()) {
    rep.degenerate = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.mean_error = rep.std_error = rep.mean_standardized = rep.std_error_standardized = nan;
    rep.ks_to_normal = rep.ks_feasible = rep.coverage = rep.risk = rep.mean_sigma_hat = nan;
    rep.mean_m = rep.floor_rate = rep.clamp_rate = nan;
    rep.warnings.push_back("all replicates failed");
    return rep;
  }
  const MeanAndError e = mean_and_error(err);
  const MeanAndError zs = mean_and_error(z);
  rep.mean_error = e.mean;
  rep.std_error = e.std_error;
  rep.mean_standardized = zs.mean;
  rep.std_error_standardized = zs.std_error;
  rep.ks_to_normal = ks_distance(z);
  rep.ks_feasible = ks_distance(zf);
  rep.coverage = coverage(results);
  rep.risk = risk(results, s.loss);
  const auto count = static_cast<double>(err.size());
  rep.mean_sigma_hat = pairwise_sum(sig) / count;
  rep.mean_m = pairwise_sum(ms) / count;
  rep.floor_rate = pairwise_sum(floors) / count;
  rep.clamp_rate = pairwise_sum(clamps) / count;
  return rep;
}

}  // namespace

std::vector<ReplicateResult> run_replicates(const Scenario& s, int jobs) {
  const Prepared p = prepare(s);
  return parallel_map(s.reps, [&](int i) { return run_one(s, p, i); }, jobs);
}

SummaryReport summarize(const Scenario& s, std::span<const ReplicateResult> results) {
  return summarize_prepared(s, prepare(s), results);
}

SummaryReport run_scenario(const Scenario& s, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  const Prepared p = prepare(s);
  const std::vector<ReplicateResult> results =
      parallel_map(s.reps, [&](int i) { return run_one(s, p, i); }, jobs);
  SummaryReport rep = summarize_prepared(s, p, results);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

double ks_distance(std::span<const double> sample) {
  if (sample.empty()) throw ValidationError("ks_distance: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double k = static_cast<double>(x.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double phi = normal_cdf(x[i]);
    const double above = static_cast<double>(i + 1) / k - phi;
    const double below = phi - static_cast<double>(i) / k;
    sup = std::max({sup, above, below});
  }
  return sup;
}

double paired_distance(std::span<const double> xi, std::span<const double> eta) {
  if (xi.size() != eta.size()) throw ValidationError("paired_distance: samples differ in size");
  if (xi.empty()) throw ValidationError("paired_distance: empty samples");
  std::vector<double> a(xi.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(xi[i] - eta[i]);
  std::sort(a.begin(), a.end());
  const double k = static_cast<double>(a.size());
  // #{a >= d} and #{a > d}
  auto at_least = [&](double d) {
    return static_cast<double>(a.end() - std::lower_bound(a.begin(), a.end(), d));
  };
  auto above = [&](double d) {
    return static_cast<double>(a.end() - std::upper_bound(a.begin(), a.end(), d));
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= a.size(); ++j) {
    const double d = static_cast<double>(j) / k;
    if (at_least(d) / k <= d) best = std::min(best, d);
  }
  for (double v : a) {
    // the infimum may sit at a_i when the condition holds just to its right
    if (above(v) / k <= v) best = std::min(best, v);
  }
  return best;
}

double coverage(std::span<const ReplicateResult> results) {
  std::vector<double> hits;
  for (const auto& r : results) {
    if (!r.failure) hits.push_back(r.ci_covers ? 1.0 : 0.0);
  }
  if (hits.empty()) throw DegenerateError("coverage: every replicate failed");
  return pairwise_sum(hits) / static_cast<double>(hits.size());
}

double risk(std::span<const ReplicateResult> results, const Loss& loss) {
  std::vector<double> values;
  for (const auto& r : results) {
    if (!r.failure) values.push_back(loss(r.standardized));
  }
  if (values.empty()) throw DegenerateError("risk: every replicate failed");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

int tail_dim_for_rank(int r, double a, double target_rank) {
  if (r < 1 || !(a > r)) throw ValidationError("tail_dim_for_rank: need r >= 1 and a > r");
  double head = 0.0;
  for (int s = 1; s <= r; ++s) head += 1.0 - (s - 1) / a;
  const double d = std::round((target_rank - head) / (1.0 - r / a));
  if (!(d >= 1.0) || !std::isfinite(d)) {
    std::ostringstream os;
    os << "tail_dim_for_rank: effective rank " << target_rank << " is not reachable with r = " << r
       << ", a = " << a;
    throw ValidationError(os.str());
  }
  return static_cast<int>(d);
}

std::vector<BiasCurvePoint> bias_sweep(const Scenario& base, const std::vector<double>& rank_grid,
                                       const BiasSweepOptions& options, int jobs) {
  if (rank_grid.empty()) throw ValidationError("bias_sweep: empty rank grid");
  const auto* spec = std::get_if<Prop32Spec>(&base.model);
  if (spec == nullptr) throw ValidationError("bias_sweep: the base scenario must use a prop32 model");

  std::vector<BiasCurvePoint> curve;
  for (std::size_t p = 0; p < rank_grid.size(); ++p) {
    Prop32Spec point_spec = *spec;
    point_spec.d = tail_dim_for_rank(spec->r, spec->a, rank_grid[p]);
    const CovarianceModel model = make_model(ModelSpec{point_spec});
    const std::uint64_t seed = seed_derive(base.master_seed, p);

    BiasCurvePoint pt;
    pt.tail_dim = point_spec.d;
    pt.effective_rank = effective_rank(model.dec());
    const BiasEstimate b = bias_oracle_mc(model, base.r, base.n, options.oracle_reps, seed, jobs);
    pt.b_hat = b.value;
    pt.b_std_error = b.std_error;
    pt.theoretical = b.theoretical;

    if (options.estimator_reps > 0) {
      Scenario s = base;
      s.model = point_spec;
      s.reps = options.estimator_reps;
      s.estimator = EstimatorKind::kPlugin;
      s.master_seed = seed_derive(seed, 1);
      const SummaryReport plug = run_scenario(s, jobs);
      pt.plugin_mean_error = plug.mean_error;
      pt.plugin_std_error = plug.std_error;
      s.estimator = EstimatorKind::kDebiased;
      s.master_seed = seed_derive(seed, 2);
      const SummaryReport deb = run_scenario(s, jobs);
      pt.debiased_mean_error = deb.mean_error;
      pt.debiased_std_error = deb.std_error;
    }
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace pcadb
