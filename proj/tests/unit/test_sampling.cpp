#include "pcadb/errors.hpp"
#include "pcadb/replicate.hpp"
#include "pcadb/rng.hpp"
#include "pcadb/sampling.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace pcadb {
namespace {

using test::diag;

TEST(SeedDerive, Deterministic) {
  EXPECT_EQ(seed_derive(42, 7), seed_derive(42, 7));
}

TEST(SeedDerive, InjectiveInIndex) {
  CounterRng masters(99);
  for (int k = 0; k < 100; ++k) {
    const std::uint64_t s = masters();
    std::vector<std::uint64_t> seen;
    seen.reserve(1 << 16);
    for (std::uint64_t i = 0; i < (1u << 16); ++i) seen.push_back(seed_derive(s, i));
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
  }
}

TEST(SeedDerive, InjectiveInMaster) {
  for (std::uint64_t i = 0; i < 64; ++i) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1024; ++s) seen.insert(seed_derive(s, i));
    EXPECT_EQ(seen.size(), 1024u);
  }
}

TEST(SeedDerive, BitExactDefinition) {
  auto reference = [](std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(seed_derive(1234567, i), reference(1234567, i));
}

TEST(MakeModel, Examples) {
  EXPECT_LT((make_model(SymMatrix::identity(2)).sqrt() - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT((make_model(diag({4, 1})).sqrt() - diag({2, 1}).matrix()).norm(), 1e-15);
  const CovarianceModel m = make_model(test::conjugated({4, 1}, 3));
  EXPECT_LT((m.sqrt() * m.sqrt() - m.sigma().matrix()).norm(), 1e-10);
}

TEST(MakeModel, RejectsIndefinite) {
  EXPECT_THROW(make_model(diag({1, -0.1})), NotPsdError);
  EXPECT_NO_THROW(make_model(diag({1, -1e-12})));
}

TEST(Prop32Model, Examples) {
  const CovarianceModel a = prop32_model(2, 4, 1, 1);
  EXPECT_NEAR(a.dec().eigenvalues()(0), 1.0, 1e-15);
  EXPECT_NEAR(a.dec().eigenvalues()(1), 0.75, 1e-15);
  EXPECT_NEAR(a.dec().eigenvalues()(2), 0.5, 1e-15);
  const double gbar = spectral_gaps(a.dec(), 2).min_gap;
  EXPECT_NEAR(gbar, 0.25, 1e-15);
  EXPECT_NEAR(a.dec().operator_norm() / gbar, 4.0, 1e-12);

  const CovarianceModel b = prop32_model(1, 2, 3, 2);
  EXPECT_EQ(b.dim(), 4);
  EXPECT_LT((b.sigma().matrix() - diag({2, 1, 1, 1}).matrix()).norm(), 1e-15);
  EXPECT_NEAR(effective_rank(b.dec()), 2.5, 1e-12);

  const CovarianceModel c = prop32_model(2, 4, 20, 1);
  EXPECT_NEAR(effective_rank(c.dec()), 11.75, 1e-12);
  EXPECT_NEAR(*c.meta().closed_form_effective_rank, 11.75, 1e-12);
  EXPECT_NEAR(prop32_effective_rank(2, 4, 20), 11.75, 1e-12);

  EXPECT_THROW(prop32_model(2, 2, 1, 1), ValidationError);
}

TEST(SpikedModel, Examples) {
  EXPECT_EQ(spiked_model({3}, 1, 4).sigma().matrix(), diag({4, 1, 1, 1}).matrix());
  EXPECT_EQ(spiked_model({}, 1, 5).sigma().matrix(), Matrix(Matrix::Identity(5, 5)));
  EXPECT_EQ(spiked_model({3, 1}, 0.5, 3).sigma().matrix(), diag({3.5, 1.5, 0.5}).matrix());
  EXPECT_THROW(spiked_model({1, 3}, 0.5, 3), ValidationError);
}

TEST(Draw, DeterministicAndOrderFree) {
  const CovarianceModel m = make_model(test::conjugated({3, 2, 1}, 4));
  const SampleSet a = draw(m, 50, 17);
  const SampleSet b = draw(m, 50, 17);
  EXPECT_EQ(a.data, b.data);
  // any prefix is the same rows
  EXPECT_EQ(draw(m, 20, 17).data, a.data.topRows(20));
  EXPECT_NE(draw(m, 50, 18).data, a.data);
}

TEST(Draw, ZeroCovarianceGivesZeros) {
  const SampleSet s = draw(make_model(SymMatrix::zero(3)), 10, 1);
  EXPECT_EQ(s.data.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Draw, SampleCovarianceWithinStandardErrors) {
  const int n = 100000;
  const SymMatrix sh = sample_covariance(draw(diagonal_model({4, 1}), n, 2718));
  // Var of entry (i, j) is (S_ii S_jj + S_ij^2) / n for Gaussian data.
  EXPECT_NEAR(sh(0, 0), 4.0, 5 * std::sqrt(32.0 / n));
  EXPECT_NEAR(sh(1, 1), 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sh(0, 1), 0.0, 5 * std::sqrt(4.0 / n));
}

TEST(SampleCovariance, Examples) {
  Matrix x(1, 2);
  x << 1, 0;
  EXPECT_EQ(sample_covariance(x).matrix(), diag({1, 0}).matrix());
  Matrix y(2, 2);
  y << 1, 0, 0, 1;
  EXPECT_EQ(sample_covariance(y).matrix(), diag({0.5, 0.5}).matrix());
  Matrix z(2, 2);
  z << 1, 1, 1, -1;
  EXPECT_EQ(sample_covariance(z).matrix(), diag({1, 1}).matrix());
  EXPECT_THROW(sample_covariance(Matrix(0, 2)), ValidationError);
}

TEST(SampleCovariance, PsdByConstruction) {
  const CovarianceModel m = prop32_model(1, 2, 30, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SymMatrix sh = sample_covariance(draw(m, 10, seed));
    EXPECT_GE(decompose(sh).min_eigenvalue(), -1e-10 * sh.matrix().trace());
  }
}

TEST(RandomOrthogonal, IsOrthogonal) {
  const Matrix q = random_orthogonal(6, 12);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_EQ(q, random_orthogonal(6, 12));
}

double mean_deviation(const CovarianceModel& m, int n, int reps, std::uint64_t seed,
                      double* std_error) {
  const std::vector<double> dev = parallel_map(reps, [&](int k) {
    return schatten_norm(sample_covariance(draw(m, n, seed_derive(seed, k))) - m.sigma(),
                         Schatten::kOperator);
  });
  const MeanAndError me = mean_and_error(dev);
  if (std_error) *std_error = me.std_error;
  return me.mean;
}

TEST(SampleCovariance, EffectiveRankDeviationRate) {
  for (int tail : {10, 40}) {
    const CovarianceModel m = prop32_model(1, 2, tail, 1);
    const double rk = effective_rank(m.dec());
    double prev = std::numeric_limits<double>::infinity(), prev_se = 0.0;
    for (int n : {50, 200, 800}) {
      double se = 0.0;
      const double mean = mean_deviation(m, n, 200, 31 + tail + n, &se);
      const double rate = std::max(std::sqrt(rk / n), rk / n);
      const double ratio = mean / (m.dec().operator_norm() * rate);
      EXPECT_GE(ratio, 0.3) << "tail " << tail << " n " << n;
      EXPECT_LE(ratio, 10.0) << "tail " << tail << " n " << n;
      EXPECT_LE(mean, prev + 3 * std::hypot(se, prev_se));
      prev = mean;
      prev_se = se;
    }
  }
}

TEST(Replicate, PairwiseSumAndMean) {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i + 1;
  EXPECT_DOUBLE_EQ(pairwise_sum(v), 500500.0);
  const MeanAndError me = mean_and_error(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(me.mean, 2.5);
  EXPECT_NEAR(me.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(me.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

TEST(Replicate, ParallelMapIsIndexOrdered) {
  const auto serial = parallel_map(100, [](int i) { return i * i; }, 1);
  const auto wide = parallel_map(100, [](int i) { return i * i; }, 8);
  EXPECT_EQ(serial, wide);
  EXPECT_THROW(parallel_map(10, [](int i) -> int { if (i == 3) throw Error("x"); return i; }, 4),
               Error);
}

}  // namespace
}  // namespace pcadb
