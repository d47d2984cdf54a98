#include "pcadb/errors.hpp"
#include "pcadb/perturbation.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace pcadb {
namespace {

using test::diag;

SymMatrix swap2() {
  Matrix e(2, 2);
  e << 0, 1, 1, 0;
  return SymMatrix(e);
}

TEST(LinearTerm, Examples) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  EXPECT_EQ(linear_term(dec, 1, SymMatrix::zero(2)).matrix().norm(), 0.0);
  Matrix expect(2, 2);
  expect << 0, 0.5, 0.5, 0;
  EXPECT_LT((linear_term(dec, 1, swap2()).matrix() - expect).norm(), 1e-15);
  const SpectralDecomposition rnd = decompose(test::conjugated({4, 2, 1}, 6));
  const SymMatrix sigma = SymMatrix::symmetrized(rnd.reconstruct());
  EXPECT_LT(linear_term(rnd, 2, sigma).matrix().norm(), 1e-12);
  EXPECT_THROW(linear_term(dec, 1, SymMatrix::zero(3)), ValidationError);
}

TEST(LinearForm, Examples) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  EXPECT_EQ(linear_form(dec, 1, swap2(), dec.eigenvector(1)), 0.0);
  EXPECT_NEAR(linear_form(dec, 1, swap2(), Vector::Unit(2, 1)), 0.5, 1e-15);
  EXPECT_THROW(linear_form(decompose(diag({2, 1, 1})), 2, SymMatrix::zero(3), Vector::Ones(3)),
               MultiplicityError);
}

TEST(LinearForm, MatchesMatrixProducts) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const SpectralDecomposition dec = decompose(test::conjugated({5, 3, 2.2, 1, 0.4, 0.1}, seed));
    const SymMatrix e = test::random_symmetric(6, seed + 500);
    const Vector u = test::random_vector(6, seed + 900);
    for (int r = 1; r <= 6; ++r) {
      const Vector theta = dec.eigenvector(r);
      const double brute = u.dot((dec.projector(r) * e.matrix() * reduced_resolvent(dec, r).matrix() +
                                  reduced_resolvent(dec, r).matrix() * e.matrix() * dec.projector(r)) *
                                 theta);
      const double form = linear_form(dec, r, e, u);
      EXPECT_NEAR(form, brute, 1e-10 * std::max(1.0, std::abs(brute)));
    }
  }
}

TEST(Remainder, Examples) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  const PerturbationReport z = remainder(dec, 1, SymMatrix::zero(2));
  EXPECT_EQ(z.linear.norm(), 0.0);
  EXPECT_LT(z.remainder.norm(), 1e-15);
  const PerturbationReport s = remainder(dec, 1, diag({3, 1}) * 0.3);
  EXPECT_LT(s.remainder.norm(), 1e-15);
  EXPECT_LT(s.linear.norm(), 1e-15);
}

TEST(Remainder, ExactDecomposition) {
  const SpectralDecomposition dec = decompose(test::conjugated({4, 2, 1, 0.5}, 11));
  const SymMatrix e = test::random_symmetric(4, 12, 0.05);
  for (int r = 1; r <= 4; ++r) {
    const PerturbationReport rep = remainder(dec, r, e);
    EXPECT_LT((rep.projector_hat - dec.projector(r) - rep.linear - rep.remainder).norm(), 1e-12);
    EXPECT_NEAR(rep.e_norm, schatten_norm(e, Schatten::kOperator), 1e-12);
  }
}

TEST(Remainder, QuadraticScaling) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  const SymMatrix e0 = test::random_symmetric(2, 77);
  std::vector<double> eps, norms;
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
    eps.push_back(t);
    norms.push_back(remainder(dec, 1, e0 * (t / schatten_norm(e0, Schatten::kOperator))).remainder.norm());
  }
  const double slope = test::loglog_slope(eps, norms);
  EXPECT_GE(slope, 1.9);
  EXPECT_LE(slope, 2.1);
}

TEST(Remainder, CrossingIsAMatchingError) {
  EXPECT_THROW(remainder(decompose(diag({3, 1})), 1, diag({-3, 0})), MatchingError);
}

TEST(Rho, Examples) {
  const SpectralDecomposition dec = decompose(diag({3, 1}));
  const Matrix p = dec.projector(1);
  EXPECT_EQ(rho(dec, 1, p, 0.0, Vector::Ones(2)), 0.0);
  EXPECT_NEAR(rho(dec, 1, p, -0.1, dec.eigenvector(1)), 0.1, 1e-15);
  EXPECT_EQ(rho(dec, 1, p, -0.1, Vector::Unit(2, 1)), 0.0);
  EXPECT_THROW(rho(dec, 1, p, 0.5, Vector::Ones(2)), ValidationError);
  const PerturbationReport rep = remainder(dec, 1, SymMatrix::zero(2), dec.eigenvector(1), -0.1);
  ASSERT_TRUE(rep.rho_u.has_value());
  EXPECT_NEAR(*rep.rho_u, 0.1, 1e-15);
}

TEST(AR, Examples) {
  EXPECT_NEAR(a_r(decompose(diag({2, 1})), 1), 4.0, 1e-14);
  EXPECT_NEAR(a_r(decompose(diag({2, 1, 1})), 1), 8.0, 1e-14);
  EXPECT_NEAR(a_r(prop32_model(2, 4, 1, 1).dec(), 2), 36.0, 1e-12);
  EXPECT_THROW(a_r(decompose(SymMatrix::identity(3)), 1), DomainError);
}

TEST(AR, TwoSidedBounds) {
  const std::vector<CovarianceModel> models{
      prop32_model(1, 2, 50, 1), prop32_model(3, 5, 10, 2), diagonal_model({5, 3, 2, 1, 1, 0.5}),
      make_model(test::conjugated({4, 3, 1, 0.7, 0.2}, 88))};
  for (const CovarianceModel& m : models) {
    const SpectralDecomposition& dec = m.dec();
    const double rk = effective_rank(dec);
    const double norm = dec.operator_norm();
    for (int r = 1; r <= dec.group_count(); ++r) {
      if (dec.group(r).multiplicity != 1) continue;
      const double mu1 = dec.group(1).value, mur = dec.group(r).value;
      const double half = a_r(dec, r) / 2.0;
      const double g = spectral_gaps(dec, r).gap;
      const double lower = mu1 * mur / std::max((mu1 - mur) * (mu1 - mur), mur * mur) * (rk - 1.0);
      EXPECT_LE(lower, half * (1 + 1e-12));
      EXPECT_LE(half, norm * norm / (g * g) * rk * (1 + 1e-12));
    }
  }
}

TEST(BiasApprox, Examples) {
  const SpectralDecomposition dec = decompose(diag({2, 1}));
  EXPECT_NEAR(bias_approx(dec, 1, 100), -0.02, 1e-16);
  EXPECT_NEAR(bias_approx(dec, 1, 1000), bias_approx(dec, 1, 100) / 10.0, 1e-17);
  EXPECT_NEAR(bias_approx(prop32_model(2, 4, 1, 1).dec(), 2, 1000), -0.018, 1e-15);
}

TEST(BiasOracle, LargeSampleMatchesLeadingTerm) {
  const BiasEstimate b = bias_oracle_mc(diagonal_model({2, 1}), 1, 100000, 400, 5);
  EXPECT_NEAR(b.value, -2e-5, 3 * b.std_error);
  EXPECT_DOUBLE_EQ(b.theoretical, -2e-5);
}

TEST(BiasOracle, Deterministic) {
  const CovarianceModel m = diagonal_model({2, 1});
  const BiasEstimate a = bias_oracle_mc(m, 1, 50, 2, 9, 1);
  const BiasEstimate b = bias_oracle_mc(m, 1, 50, 2, 9, 2);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(BiasOracle, SmallSampleWithinThirdOrderSlack) {
  const BiasEstimate b = bias_oracle_mc(diagonal_model({2, 1}), 1, 50, 5000, 13);
  EXPECT_GE(b.value, -1.0);
  EXPECT_LE(b.value, 0.0);
  EXPECT_GE(b.value, -0.04 * 1.3 - 3 * b.std_error);
  EXPECT_LE(b.value, -0.04 * 0.7 + 3 * b.std_error);
}

TEST(LinearTermEnergy, ExactIdentity) {
  const LinearTermEnergy l = linear_term_energy_mc(prop32_model(1, 2, 5, 1), 1, 100, 3000, 21);
  EXPECT_NEAR(l.mean, l.theoretical, 4 * l.std_error);
}

}  // namespace
}  // namespace pcadb
