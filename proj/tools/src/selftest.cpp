#include "pcadb/cluster.hpp"
#include "pcadb/errors.hpp"
#include "pcadb/estimators.hpp"
#include "pcadb/lowerbound.hpp"
#include "pcadb/montecarlo.hpp"
#include "pcadb/perturbation.hpp"
#include "pcadb/rng.hpp"
#include "pcadb_cli/commands.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

namespace pcadb::cli {

namespace {

SymMatrix random_symmetric(int d, std::uint64_t seed, double scale) {
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix a(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) a(i, j) = normal(rng);
  }
  return SymMatrix::symmetrized(0.5 * (a + a.transpose()));
}

CovarianceModel conjugated(const std::vector<double>& eigs, std::uint64_t seed) {
  const int d = static_cast<int>(eigs.size());
  const Matrix q = random_orthogonal(d, seed);
  const Vector l = Eigen::Map<const Vector>(eigs.data(), d);
  return make_model(SymMatrix::symmetrized(q * l.asDiagonal() * q.transpose()));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SelfTestCheck weyl() {
  const CovarianceModel m = conjugated({5, 4, 3, 2, 1}, 11);
  const SymMatrix e = random_symmetric(5, 12, 0.1);
  const double dev = weyl_deviation(decompose(m.sigma() + e), m.dec());
  const double bound = schatten_norm(e, Schatten::kOperator);
  return {"weyl_inequality", dev <= bound + 1e-12, "deviation " + fmt(dev) + " vs ||E|| " + fmt(bound)};
}

SelfTestCheck sigma_forms() {
  const CovarianceModel m = conjugated({4, 2.5, 1.5, 1, 0.5}, 21);
  const Vector u = Vector::LinSpaced(5, 1.0, 2.0);
  const double v = variance_true(m.dec(), 2, u);  // throws on disagreement
  const double two = variance_true(diagonal_model({2, 1}).dec(), 1, Vector::Unit(2, 1));
  return {"sigma_two_forms", std::abs(two - 2.0) < 1e-12 && v > 0.0, "diag(2,1) gives " + fmt(two)};
}

SelfTestCheck b_identity() {
  const CovarianceModel m = conjugated({3, 2, 1, 0.5}, 31);
  const Vector u = Vector::LinSpaced(4, -1.0, 1.0);
  const SymMatrix b = b_matrix(m.dec(), 1, u);  // throws on disagreement
  return {"b_matrix_identity", b.dim() == 4, "checked inside b_matrix"};
}

SelfTestCheck linear_identity() {
  const CovarianceModel m = conjugated({3, 2, 1, 0.5}, 41);
  const SymMatrix e = random_symmetric(4, 42, 0.05);
  const Vector u = Vector::LinSpaced(4, 0.5, -0.5) + Vector::Unit(4, 0);
  const Vector theta = m.dec().eigenvector(1);
  const double lhs = (linear_term(m.dec(), 1, e).matrix() * theta).dot(u);
  const double rhs = linear_form(m.dec(), 1, e, u);
  const bool ok = std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs));
  return {"linear_form_identity", ok, fmt(lhs) + " vs " + fmt(rhs)};
}

SelfTestCheck remainder_slope() {
  const CovarianceModel m = conjugated({3, 2, 1, 0.5}, 51);
  const SymMatrix e = random_symmetric(4, 52, 1.0);
  std::vector<double> xs, ys;
  for (double eps : {1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3}) {
    xs.push_back(std::log(eps));
    ys.push_back(std::log(remainder(m.dec(), 1, e * eps).remainder.norm()));
  }
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
  }
  const double slope = sxy / sxx;
  return {"remainder_quadratic", std::abs(slope - 2.0) <= 0.1, "slope " + fmt(slope)};
}

SelfTestCheck derivative() {
  const CovarianceModel m = diagonal_model({3, 1, 0.5});
  const Vector u = Vector::Ones(3) / std::sqrt(3.0);
  const SymMatrix b = b_matrix(m.dec(), 1, u);
  const DerivativeCheck d = g_derivative_check(m, 1, u, b, 100.0, 0.2);
  const bool ok = std::abs(d.analytic - d.numeric) <= 1e-5 * (1.0 + std::abs(d.analytic));
  return {"g_derivative", ok, fmt(d.analytic) + " vs " + fmt(d.numeric)};
}

SelfTestCheck clusters() {
  const std::vector<double> eigs{5.0, 4.95, 3.0, 1.0, 0.98, 0.97};
  const DeltaClustering c = delta_clusters(std::span<const double>(eigs), 0.5);
  bool ok = c.nu() == 3;
  int next = 0;
  for (const auto& cl : c.clusters) {
    ok = ok && cl.first == next;
    for (int j = cl.first; j < cl.last(); ++j) ok = ok && eigs[j] - eigs[j + 1] < 0.5;
    if (cl.last() + 1 < static_cast<int>(eigs.size())) ok = ok && eigs[cl.last()] - eigs[cl.last() + 1] >= 0.5;
    next = cl.last() + 1;
  }
  ok = ok && next == static_cast<int>(eigs.size());
  return {"delta_cluster_partition", ok, std::to_string(c.nu()) + " clusters"};
}

SelfTestCheck determinism() {
  Scenario s;
  s.model = DiagonalSpec{{3, 1, 0.5}};
  s.u = FunctionalSpec{{}, "e2"};
  s.n = 60;
  s.reps = 8;
  s.master_seed = 7;
  const SummaryReport a = run_scenario(s, 1);
  const SummaryReport b = run_scenario(s, 3);
  const bool ok = a.mean_error == b.mean_error && a.ks_to_normal == b.ks_to_normal &&
                  a.coverage == b.coverage && a.risk == b.risk;
  return {"determinism", ok, "mean error " + fmt(a.mean_error)};
}

}  // namespace

std::vector<SelfTestCheck> run_selftest() {
  const std::vector<std::function<SelfTestCheck()>> checks{
      weyl, sigma_forms, b_identity, linear_identity, remainder_slope, derivative, clusters, determinism};
  std::vector<SelfTestCheck> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace pcadb::cli
