#pragma once

// First-order perturbation theory for spectral projectors:
//   P_hat_r = P_r + L_r(E) + S_r(E),   L_r(E) = P_r E C_r + C_r E P_r,
// the bias coefficient A_r(Sigma) and Monte Carlo oracles for the bias
// parameter b_r = E <theta_hat_r, theta_r>^2 - 1.

#include "pcadb/sampling.hpp"
#include "pcadb/spectral.hpp"

#include <cstdint>
#include <optional>

namespace pcadb {

SymMatrix linear_term(const SpectralDecomposition& dec, int r, const SymMatrix& e);

// <L_r(E) theta_r, u> evaluated as <E theta_r, C_r u>. Needs m_r = 1.
double linear_form(const SpectralDecomposition& dec, int r, const SymMatrix& e, const Vector& u);

// Projector of `perturbed` onto the eigenvalue indices Delta_r of the
// reference decomposition. Throws MatchingError when the block is tied with
// a neighbour or one of its eigenvalues sits closer to another mu_s.
Matrix matched_projector(const SpectralDecomposition& reference, int r,
                         const SpectralDecomposition& perturbed);

struct PerturbationReport {
  Matrix projector_hat;  // P_hat_r (index matched)
  Matrix linear;         // L_r(E)
  Matrix remainder;      // S_r(E) = P_hat_r - P_r - L_r(E)
  std::optional<double> rho_u;
  double e_norm = 0.0;
};

PerturbationReport remainder(const SpectralDecomposition& dec, int r, const SymMatrix& e);
// Also fills rho_u = rho_r(u) with the supplied bias parameter.
PerturbationReport remainder(const SpectralDecomposition& dec, int r, const SymMatrix& e,
                             const Vector& u, double b_r);

// rho_r(u) = <(P_hat_r - (1 + b_r) P_r) theta_r, u>.
double rho(const SpectralDecomposition& dec, int r, const Matrix& p_hat, double b_r,
           const Vector& u);

// A_r(Sigma) = 2 tr(P_r Sigma P_r) tr(C_r Sigma C_r)
//            = 2 sum_{s != r} mu_r mu_s m_s / (mu_r - mu_s)^2   (m_r = 1).
// Both forms are evaluated; disagreement beyond 1e-10 relative throws
// NumericalError.
double a_r(const SpectralDecomposition& dec, int r);

// Leading term -A_r / (2n) of b_r.
double bias_approx(const SpectralDecomposition& dec, int r, int n);

struct BiasEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int reps = 0;
  double theoretical = 0.0;  // -A_r / (2n)
};

// Monte Carlo mean of <theta_hat_r, theta_r>^2 - 1 over `reps` samples of
// size n; replicate k uses seed_derive(seed, k). theta_hat_r is the
// eigenvector at the model's index Delta_r.
BiasEstimate bias_oracle_mc(const CovarianceModel& model, int r, int n, int reps,
                            std::uint64_t seed, int jobs = 0);

struct LinearTermEnergy {
  double mean = 0.0;  // MC mean of ||L_r(Sigma_hat - Sigma)||_2^2
  double std_error = 0.0;
  int reps = 0;
  double theoretical = 0.0;  // A_r / n
};

LinearTermEnergy linear_term_energy_mc(const CovarianceModel& model, int r, int n, int reps,
                                       std::uint64_t seed, int jobs = 0);

}  // namespace pcadb
