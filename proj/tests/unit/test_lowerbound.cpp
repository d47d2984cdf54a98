#include "pcadb/errors.hpp"
#include "pcadb/estimators.hpp"
#include "pcadb/lowerbound.hpp"
#include "pcadb/perturbation.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace pcadb {
namespace {

using test::diag;

TEST(CosinePrior, DensityAndInformation) {
  EXPECT_EQ(CosinePrior::base_density(1.0), CosinePrior::base_density(-1.0));
  EXPECT_LT(CosinePrior::base_density(1.0), 1e-30);
  EXPECT_EQ(CosinePrior::base_density(1.5), 0.0);
  const CosinePrior p(3.0);
  // midpoint rule on a fine grid
  const int k = 200000;
  double mass = 0.0;
  for (int i = 0; i < k; ++i) mass += p.density(-3.0 + 6.0 * (i + 0.5) / k) * 6.0 / k;
  EXPECT_NEAR(mass, 1.0, 1e-8);
  EXPECT_NEAR(CosinePrior::base_information(), std::numbers::pi * std::numbers::pi, 1e-8);
  EXPECT_NEAR(p.information(), CosinePrior::base_information() / 9.0, 1e-14);
  EXPECT_THROW(CosinePrior(0.0), ValidationError);
}

TEST(BMatrix, Examples) {
  const SpectralDecomposition dec = decompose(diag({2, 1}));
  EXPECT_EQ(b_matrix(dec, 1, dec.eigenvector(1)).matrix().norm(), 0.0);
  Matrix expect(2, 2);
  expect << 0, 1, 1, 0;
  EXPECT_LT((b_matrix(dec, 1, Vector::Unit(2, 1)).matrix() - expect).norm(), 1e-15);
  EXPECT_THROW(b_matrix(decompose(diag({2, 1, 0})), 1, Vector::Ones(3)), DomainError);
}

TEST(BMatrix, IdentitiesAndBounds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpectralDecomposition dec = decompose(test::conjugated({4, 2.5, 1.5, 0.6, 0.3}, seed));
    const Vector u = test::random_vector(5, seed + 300);
    for (int r = 1; r <= 5; ++r) {
      const SymMatrix b = b_matrix(dec, r, u);
      const Matrix sigma = dec.reconstruct();
      const Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
      const Matrix isqrt = es.operatorInverseSqrt();
      const double bnorm = (isqrt * b.matrix() * isqrt).squaredNorm();
      const double s2 = variance_true(dec, r, u);
      EXPECT_NEAR(2 * bnorm, s2, 1e-8 * s2);
      EXPECT_NEAR(linear_form(dec, r, b, u), bnorm, 1e-8 * bnorm);

      const double norm = dec.operator_norm();
      const double g = spectral_gaps(dec, r).gap;
      const double op = schatten_norm(b, Schatten::kOperator);
      const double fro = schatten_norm(b, Schatten::kFrobenius);
      const double nuc = schatten_norm(b, Schatten::kNuclear);
      EXPECT_LE(op, fro + 1e-12);
      EXPECT_LE(fro, norm * norm / g * u.norm() / std::sqrt(2.0) * (1 + 1e-12));
      EXPECT_LE(nuc, norm * norm / g * u.norm() * (1 + 1e-12));
      EXPECT_LE((sigma.inverse() * b.matrix()).norm(), norm / g * u.norm() / std::sqrt(2.0) * (1 + 1e-10));
      const Eigen::JacobiSVD<Matrix> svd(b.matrix());
      EXPECT_LE(svd.singularValues()(2), 1e-10 * std::max(op, 1e-300));
    }
  }
}

TEST(FisherInfo, Examples) {
  EXPECT_EQ(fisher_info(SymMatrix::identity(2), SymMatrix::zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(fisher_info(SymMatrix::identity(2), SymMatrix::identity(2)), 1.0);
  Matrix h(2, 2);
  h << 0, 1, 1, 0;
  EXPECT_DOUBLE_EQ(fisher_info(diag({2, 1}), SymMatrix(h)), 0.5);
  EXPECT_THROW(fisher_info(diag({1, 0}), SymMatrix(h)), DomainError);
}

TEST(FisherInfo, NonNegativeAndQuadratic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SymMatrix s = test::conjugated({3, 2, 1, 0.5}, seed);
    const SymMatrix h = test::random_symmetric(4, seed + 60);
    const double f = fisher_info(s, h);
    EXPECT_GE(f, 0.0);
    EXPECT_NEAR(fisher_info(s, h * 2.5), 6.25 * f, 1e-10 * f);
  }
}

TEST(VanTrees, NeverExceedsVarianceAndMonotoneInN) {
  const CovarianceModel m = diagonal_model({2, 1});
  const Vector u = Vector::Unit(2, 1);
  double prev = -1.0;
  for (double n : {1e4, 1e5, 1e6, 1e7, 1e8, 1e10}) {
    const VanTreesResult v = van_trees_bound(m, 1, u, n, 2.0);
    EXPECT_TRUE(v.admissibility.ok());
    EXPECT_NEAR(v.sigma2, 2.0, 1e-14);
    EXPECT_LE(v.bound, v.sigma2 + 1e-8);
    EXPECT_GE(v.bound, prev - 1e-12);
    EXPECT_NEAR(v.j_pi, std::numbers::pi * std::numbers::pi, 1e-8);
    EXPECT_NEAR(2 * v.b_norm, v.sigma2, 1e-8);
    prev = v.bound;
  }
}

TEST(VanTrees, InadmissibleInputsAreReported) {
  const CovarianceModel m = diagonal_model({2, 1});
  const Vector u = Vector::Unit(2, 1);
  try {
    van_trees_bound(m, 1, u, 1.0, 10.0);
    FAIL();
  } catch (const AdmissibilityError& e) {
    EXPECT_FALSE(e.failed_conditions().empty());
  }
  VanTreesOptions relaxed;
  relaxed.enforce_admissibility = false;
  relaxed.class_constants = ClassConstants{2.0, 1.0};
  const VanTreesResult v = van_trees_bound(m, 1, u, 1.0, 10.0, relaxed);
  EXPECT_FALSE(v.admissibility.ok());
  EXPECT_GE(v.bound, 0.0);
  EXPECT_TRUE(v.class_ratio.has_value());
}

TEST(VanTrees, IntegralBoundApproachesVariance) {
  const CovarianceModel m = diagonal_model({2, 1});
  const Vector u = Vector::Unit(2, 1);
  const double a = van_trees_integral_bound(m, 1, u, 1e4, 5.0);
  const double b = van_trees_integral_bound(m, 1, u, 1e8, 1e3);
  EXPECT_LE(a, 2.0);
  EXPECT_LE(b, 2.0 + 1e-8);
  EXPECT_GT(b, a);
  EXPECT_GT(b, 0.98 * 2.0);
}

TEST(GDerivative, Examples) {
  const CovarianceModel m = diagonal_model({3, 1, 0.5});
  const Vector u = test::random_vector(3, 1);
  const DerivativeCheck zero = g_derivative_check(m, 1, u, SymMatrix::zero(3), 100.0, 0.2);
  EXPECT_EQ(zero.analytic, 0.0);
  EXPECT_NEAR(zero.numeric, 0.0, 1e-12);

  const SymMatrix b = b_matrix(m.dec(), 1, u);
  const DerivativeCheck d = g_derivative_check(m, 1, u, b, 100.0, 0.2);
  EXPECT_LE(std::abs(d.analytic - d.numeric), 1e-5 * (1 + std::abs(d.analytic)));
}

TEST(GDerivative, VanishesAtTheEigenvectorItself) {
  const CovarianceModel m = diagonal_model({3, 1, 0.5});
  const SymMatrix h = test::random_symmetric(3, 4);
  const double n = 100.0, t = 0.3;
  const SpectralDecomposition dt = decompose(m.sigma() + h * (t / std::sqrt(n)));
  const Vector theta_t = align(dt.eigenvector(1), m.dec().eigenvector(1));
  const DerivativeCheck d = g_derivative_check(m, 1, theta_t, h, n, t);
  EXPECT_NEAR(d.analytic, 0.0, 1e-14);
  EXPECT_NEAR(d.numeric, 0.0, 1e-6);
}

TEST(GDerivative, AgreesAcrossSeededGrid) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const CovarianceModel m = make_model(test::conjugated({4, 2.5, 1, 0.4}, seed));
    const Vector u = test::random_vector(4, seed + 10);
    for (int r = 1; r <= 3; ++r) {
      const SymMatrix h = b_matrix(m.dec(), r, u);
      for (double t : {-0.5, 0.0, 0.4}) {
        const DerivativeCheck d = g_derivative_check(m, r, u, h, 400.0, t);
        EXPECT_LE(std::abs(d.analytic - d.numeric), 1e-5 * (1 + std::abs(d.analytic)))
            << "seed " << seed << " r " << r << " t " << t;
      }
    }
  }
}

}  // namespace
}  // namespace pcadb
