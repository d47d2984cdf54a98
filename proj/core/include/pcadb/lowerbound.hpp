#pragma once

// van Trees lower bound for estimating <theta_r, u> along the path
// Sigma_t = Sigma + t H / sqrt(n), |t| <= c, with H = B and the cosine prior.

#include "pcadb/sampling.hpp"
#include "pcadb/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcadb {

// Base prior pi(t) = cos^2(pi t / 2) on [-1, 1] and its rescaling
// pi_c(t) = pi(t / c) / c on [-c, c].
class CosinePrior {
 public:
  explicit CosinePrior(double c);

  double c() const { return c_; }
  double density(double t) const;
  // J_pi = int pi'^2 / pi, by adaptive quadrature (computed once, cached).
  static double base_information();
  // J_{pi_c} = J_pi / c^2.
  double information() const;

  static double base_density(double t);

 private:
  double c_;
};

// B = (Sigma theta_r (x) Sigma C_r u + Sigma C_r u (x) Sigma theta_r) / 2.
// Checks 2 ||Sigma^{-1/2} B Sigma^{-1/2}||_2^2 = sigma_r^2(Sigma; u) to 1e-8
// relative; singular Sigma is a DomainError.
SymMatrix b_matrix(const SpectralDecomposition& dec, int r, const Vector& u);

// tr(Sigma_t^{-1} H Sigma_t^{-1} H) / 2; Sigma_t must be positive definite.
double fisher_info(const SymMatrix& sigma_t, const SymMatrix& h);

struct Admissibility {
  double delta = 0.0;  // min(||Sigma^{-1}||^{-1}, g_bar_r / 4) / 2
  double h_nuclear_term = 0.0;   // c ||B||_1 / sqrt(n)
  double inverse_term = 0.0;     // c ||Sigma^{-1} B|| / sqrt(n)
  double xyz_term = 0.0;         // D1 / sigma^2 ||Sigma||^4 / g^4 c / sqrt(n) ||u||^3
  bool cond_H = false;
  bool cond_delta_1 = false;
  bool cond_delta_2 = false;
  bool cond_HH = false;
  bool assump_XYZ = false;

  std::vector<std::string> failed() const;
  bool ok() const { return failed().empty(); }
};

struct ClassConstants {
  double a = 0.0;
  double sigma0 = 0.0;
};

struct VanTreesResult {
  // sigma^2 * max(first bracket, 0) * max(second bracket, 0); the factors
  // use B1 = D1 = 1.
  double bound = 0.0;
  double numerator = 0.0;    // B1 c ||B||^2 ||u|| / (2 g^2 sqrt n) + fisher_term + prior_term
  double denominator = 0.0;  // sigma^2 / 4 + fisher_term + prior_term
  double first_factor = 0.0;   // 1 - numerator / denominator
  double second_factor = 0.0;  // 1 - sigma_term
  double b_norm = 0.0;         // ||Sigma^{-1/2} B Sigma^{-1/2}||_2^2
  double sigma2 = 0.0;
  double j_pi = 0.0;
  // Remainder terms reported individually.
  double numerator_term = 0.0;  // B1 c ||B||^2 ||u|| / (2 g^2 sqrt n)
  double fisher_term = 0.0;     // 3 c ||Sigma^{-1} B||_2^3 / sqrt n
  double prior_term = 0.0;      // J_pi / c^2
  double sigma_term = 0.0;      // D1 / sigma^2 ||Sigma||^2 / g^3 c ||B|| / sqrt n ||u||^2
  Admissibility admissibility;
  // Same bracket product with the class constants (a, sigma0) in place of
  // the model's quantities; a ratio to sigma^2, not a risk.
  std::optional<double> class_ratio;
};

struct VanTreesOptions {
  bool enforce_admissibility = true;
  std::optional<ClassConstants> class_constants;
};

// Throws AdmissibilityError listing the failed conditions unless
// enforce_admissibility is off.
VanTreesResult van_trees_bound(const CovarianceModel& model, int r, const Vector& u, double n,
                               double c, const VanTreesOptions& options = {});

// The van Trees right-hand side itself,
//   (int <L_t(B) theta_t, u> pi_c dt)^2 / (int I_n(t) pi_c dt + J_pi / c^2),
// by Gauss-Kronrod quadrature over the path. No remainder bounds involved.
double van_trees_integral_bound(const CovarianceModel& model, int r, const Vector& u, double n,
                                double c);

struct DerivativeCheck {
  double analytic = 0.0;
  double numeric = 0.0;
};

// g(t) = <theta_t, u> with theta_t aligned to theta_r(Sigma);
// analytic = <L_t(H) theta_t, u> / sqrt(n), numeric = central difference
// with step 1e-6 (1 + |t|).
DerivativeCheck g_derivative_check(const CovarianceModel& model, int r, const Vector& u,
                                   const SymMatrix& h, double n, double t);

}  // namespace pcadb
