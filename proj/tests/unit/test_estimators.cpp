#include "pcadb/errors.hpp"
#include "pcadb/estimators.hpp"
#include "pcadb/normal.hpp"
#include "pcadb/perturbation.hpp"
#include "pcadb/replicate.hpp"
#include "pcadb/rng.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace pcadb {
namespace {

using test::diag;

TEST(VarianceTrue, Examples) {
  const SpectralDecomposition dec = decompose(diag({2, 1}));
  EXPECT_NEAR(variance_true(dec, 1, Vector::Unit(2, 1)), 2.0, 1e-14);
  EXPECT_EQ(variance_true(dec, 1, dec.eigenvector(1)), 0.0);
  const CovarianceModel m = prop32_model(2, 4, 3, 1);
  const Vector u = (m.dec().eigenvector(1) + m.dec().eigenvector(2)) / std::sqrt(2.0);
  EXPECT_NEAR(variance_true(m.dec(), 2, u), 6.0, 1e-12);
  EXPECT_THROW(variance_true(decompose(diag({2, 1, 1})), 2, Vector::Ones(3)), MultiplicityError);
}

TEST(VarianceTrue, UpperBoundAndScaleInvariance) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const SpectralDecomposition dec = decompose(test::conjugated({6, 3, 2.5, 1, 0.2}, seed));
    const SymMatrix s = SymMatrix::symmetrized(dec.reconstruct());
    const Vector u = test::random_vector(5, seed + 40);
    for (int r = 1; r <= 5; ++r) {
      const double v = variance_true(dec, r, u);
      const double g = spectral_gaps(dec, r).gap;
      const double norm = dec.operator_norm();
      EXPECT_LE(v, norm * norm / (g * g) * u.squaredNorm() * (1 + 1e-12));
      EXPECT_NEAR(variance_true(decompose(s * 3.7), r, u), v, 1e-10 * v);
    }
  }
}

TEST(VarianceEstimate, Examples) {
  Matrix rows(2, 2);
  rows << 2, 0, 0, std::sqrt(2.0);
  const SampleSet exact = sample_set_from_rows(rows);
  EXPECT_NEAR(variance_estimate(exact, 1, Vector::Unit(2, 1)), std::sqrt(2.0), 1e-14);
  EXPECT_EQ(variance_estimate(exact, 1, Vector::Zero(2)), 0.0);
  const SampleSet big = draw(diagonal_model({2, 1}), 100000, 3);
  EXPECT_NEAR(variance_estimate(big, 1, Vector::Unit(2, 1)), std::sqrt(2.0), 0.1 * std::sqrt(2.0));
}

TEST(VarianceEstimate, ConsistentAtLargeN) {
  const CovarianceModel m = prop32_model(1, 2, 60, 1);
  const Vector u = Vector::Unit(m.dim(), 1);
  const double truth = std::sqrt(variance_true(m.dec(), 1, u));
  const double est = variance_estimate(draw(m, 100000, 8), 1, u);
  EXPECT_NEAR(est / truth, 1.0, 0.1);
}

TEST(PluginEstimate, Examples) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  EXPECT_DOUBLE_EQ(plugin_estimate(dec, 1, 0.1, Vector::Unit(2, 0)).value, 1.0);
  EXPECT_DOUBLE_EQ(plugin_estimate(dec, 1, 0.1, Vector::Unit(2, 1)).value, 0.0);
  EXPECT_THROW(plugin_estimate(decompose(diag({3, 2.9, 1})), 1, 0.5, Vector::Ones(3)),
               MultiplicityError);
}

TEST(PluginEstimate, Invariants) {
  const CovarianceModel m = prop32_model(1, 2, 10, 1);
  const Vector u = test::random_vector(m.dim(), 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PluginEstimate p = plugin_estimate(draw(m, 200, seed), 1, 0.1, u);
    EXPECT_NEAR(p.theta_hat.norm(), 1.0, 1e-10);
    EXPECT_LE(std::abs(p.value), u.norm() + 1e-12);
  }
}

// Centering of the aligned plug-in value at sqrt(1 + b_r) <theta_r, u>, with
// b_r taken from a separate oracle run.
TEST(PluginEstimate, CenteredAtShrunkTruth) {
  const CovarianceModel m = diagonal_model({3, 1});
  const Vector u = Vector::Ones(2) / std::sqrt(2.0);
  const Vector theta = m.dec().eigenvector(1);
  const int reps = 2000;
  const std::vector<double> vals = parallel_map(reps, [&](int k) {
    const PluginEstimate p = plugin_estimate(draw(m, 500, seed_derive(404, k)), 1, 0.1, u);
    return align(p.theta_hat, theta).dot(u);
  });
  const MeanAndError me = mean_and_error(vals);
  const BiasEstimate b = bias_oracle_mc(m, 1, 500, reps, 505);
  const double target = std::sqrt(1 + b.value) * theta.dot(u);
  const double se_target = 0.5 / std::sqrt(1 + b.value) * b.std_error * theta.dot(u);
  EXPECT_NEAR(me.mean, target, 3 * std::hypot(me.std_error, se_target));
}

TEST(SplitSizes, Examples) {
  SplitSizes s = split_sizes(10000, 1);
  EXPECT_EQ(s.m, 1000);
  EXPECT_EQ(s.n_prime, 8000);
  EXPECT_FALSE(s.clamped);
  s = split_sizes(10000, 16);
  EXPECT_EQ(s.m, 2000);
  EXPECT_EQ(s.n_prime, 6000);
  s = split_sizes(100, 1e6);
  EXPECT_EQ(s.m, 25);
  EXPECT_EQ(s.n_prime, 50);
  EXPECT_TRUE(s.clamped);
  EXPECT_THROW(split_sizes(11, 1), ValidationError);
  EXPECT_THROW(split_sizes(100, 0.5), ValidationError);
}

TEST(SplitSizes, Invariants) {
  for (int n = 12; n < 3000; n += 7) {
    for (double rh : {1.0, 3.5, 50.0, 1e4}) {
      const SplitSizes s = split_sizes(n, rh);
      EXPECT_EQ(s.n_prime + 2 * s.m, n);
      EXPECT_GT(3 * s.n_prime, n);
      EXPECT_GE(s.m, std::min(4, n / 4));
      EXPECT_LE(s.m, n / 4);
    }
  }
}

TEST(DebiasFactor, Examples) {
  const Vector e1 = Vector::Unit(2, 0), e2 = Vector::Unit(2, 1);
  EXPECT_DOUBLE_EQ(debias_factor(e1, e1, e1).value, 1.0);
  const Vector t1(Eigen::Vector2d(std::cos(0.1), std::sin(0.1)));
  EXPECT_NEAR(debias_factor(t1, e1, e1).value, 0.995004, 1e-6);
  const DebiasFactor f = debias_factor(t1, e1, e2);
  EXPECT_TRUE(f.floor_engaged);
  EXPECT_NEAR(f.value, std::cos(0.1) / 0.25, 1e-15);
}

SampleSet alternating(int n, double scale = 1.0) {
  Matrix rows = Matrix::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0) rows(i, 0) = 3.0 * scale;
    else rows(i, 1) = 1.0 * scale;
  }
  return sample_set_from_rows(rows);
}

TEST(DebiasedEstimate, NoiselessInputIsUnchanged) {
  const Vector u(Eigen::Vector2d(0.6, 0.8));
  const DebiasedEstimate d = debiased_estimate(alternating(24), 1, 0.1, u, 4);
  EXPECT_DOUBLE_EQ(d.d_check, 1.0);
  EXPECT_EQ(d.theta_check, d.theta_hat1);
  EXPECT_DOUBLE_EQ(d.value, 0.6);
  EXPECT_EQ(d.n_prime, 16);
  EXPECT_EQ(d.m, 4);
}

TEST(DebiasedEstimate, DeterministicAndScaleInvariant) {
  const CovarianceModel m = prop32_model(1, 2, 20, 1);
  const SampleSet s = draw(m, 400, 77);
  const Vector u = Vector::Unit(m.dim(), 1);
  const DebiasedEstimate a = debiased_estimate(s, 1, 0.1, u);
  const DebiasedEstimate b = debiased_estimate(s, 1, 0.1, u);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.d_check, b.d_check);
  SampleSet scaled = s;
  scaled.data *= 4.0;
  EXPECT_NEAR(debiased_estimate(scaled, 1, 0.1, u).value, a.value, 1e-10);
  EXPECT_LE(a.theta_check.norm(), 2.0 + 1e-12);
  EXPECT_NEAR(a.theta_check.norm(), 1.0 / std::max(a.d_check, 0.5), 1e-12);
  EXPECT_EQ(a.n_prime + 2 * a.m, 400);
}

TEST(DebiasedEstimate, Errors) {
  const SampleSet s = alternating(24);
  EXPECT_THROW(debiased_estimate(s, 1, 0.1, Vector::Ones(2), 8), ValidationError);
  EXPECT_THROW(debiased_estimate(alternating(10), 1, 0.1, Vector::Ones(2)), ValidationError);
  try {
    debiased_estimate(s, 3, 0.1, Vector::Ones(2), 4);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_EQ(e.subsample(), 1);
  }
}

TEST(ConfidenceInterval, Examples) {
  const Interval a = confidence_interval(0.0, 1.0, 100, 0.05);
  EXPECT_NEAR(a.lo, -0.19600, 1e-4);
  EXPECT_NEAR(a.hi, 0.19600, 1e-4);
  const Interval b = confidence_interval(0.3, 0.0, 100, 0.05);
  EXPECT_EQ(b.lo, 0.3);
  EXPECT_EQ(b.hi, 0.3);
  const Interval c = confidence_interval(1.0, 1.0, 1, 0.32);
  EXPECT_NEAR(c.hi - 1.0, 0.99446, 1e-5);
  EXPECT_THROW(confidence_interval(0, 1, 10, 0.0), ValidationError);
  EXPECT_THROW(confidence_interval(0, 1, 10, 1.0), ValidationError);
}

TEST(NormalQuantile, Accuracy) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12);
  EXPECT_THROW(normal_quantile(0.0), ValidationError);
}

TEST(VariancePerturbation, Examples) {
  const SpectralDecomposition dec = decompose(diag({2, 1}));
  const Vector u = Vector::Unit(2, 1);
  EXPECT_EQ(variance_perturbation_check(dec, 1, u, SymMatrix::zero(2)).lhs, 0.0);
  const double eps = 1e-3;
  const double closed = std::abs((2 + eps) / ((1 + eps) * (1 + eps)) - 2.0);
  EXPECT_NEAR(variance_perturbation_check(dec, 1, u, diag({eps, 0})).lhs, closed, 1e-12);
  EXPECT_THROW(variance_perturbation_check(dec, 1, u, diag({0.3, 0})), ValidationError);
}

TEST(VariancePerturbation, FirstOrderSlope) {
  const SpectralDecomposition dec = decompose(diag({2, 1}));
  std::vector<double> eps, lhs;
  for (double e : {1e-5, 1e-4, 1e-3, 1e-2}) {
    eps.push_back(e);
    lhs.push_back(variance_perturbation_check(dec, 1, Vector::Unit(2, 1), diag({e, 0})).lhs);
  }
  const double slope = test::loglog_slope(eps, lhs);
  EXPECT_GE(slope, 0.9);
  EXPECT_LE(slope, 1.1);
}

TEST(Loss, ClassProperties) {
  for (const Loss& l : {Loss::squared(), Loss::absolute(), Loss::huber(1.5)}) {
    EXPECT_EQ(l(0.0), 0.0);
    double prev = 0.0;
    for (double x = 0.0; x < 8.0; x += 0.25) {
      EXPECT_EQ(l(x), l(-x));
      EXPECT_GE(l(x), prev);
      EXPECT_LE(l(x), l.c1() * std::exp(l.c2() * x));
      if (x >= 0.25) EXPECT_GE(l(x - 0.25) + l(x + 0.25), 2 * l(x) - 1e-12);
      prev = l(x);
    }
    EXPECT_EQ(parse_loss(l.name()), l);
  }
  EXPECT_DOUBLE_EQ(Loss::huber(1.0)(3.0), 2.5);
  EXPECT_THROW(parse_loss("cubic"), ValidationError);
  EXPECT_THROW(Loss::huber(0.0), ValidationError);
}

}  // namespace
}  // namespace pcadb
