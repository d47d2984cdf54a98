#include "pcadb/lowerbound.hpp"

#include "pcadb/cluster.hpp"
#include "pcadb/errors.hpp"
#include "pcadb/estimators.hpp"
#include "pcadb/perturbation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace pcadb {

using std::numbers::pi;

CosinePrior::CosinePrior(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("CosinePrior: c must be positive");
}

double CosinePrior::base_density(double t) {
  if (t < -1.0 || t > 1.0) return 0.0;
  const double v = std::cos(pi * t / 2.0);
  return v * v;
}

double CosinePrior::density(double t) const { return base_density(t / c_) / c_; }

double CosinePrior::base_information() {
  static const double value = [] {
    auto integrand = [](double t) {
      const double p = base_density(t);
      if (p <= 0.0) return 0.0;
      const double dp = -(pi / 2.0) * std::sin(pi * t);
      return dp * dp / p;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -1.0, 1.0, 15,
                                                                          1e-14);
  }();
  return value;
}

double CosinePrior::information() const { return base_information() / (c_ * c_); }

namespace {

void require_u(const Vector& u, int d, const char* what) {
  if (u.size() != d) {
    std::ostringstream os;
    os << what << ": u has dimension " << u.size() << ", expected " << d;
    throw ValidationError(os.str());
  }
}

Matrix inverse_sqrt_matrix(const SpectralDecomposition& dec) {
  if (!(dec.min_eigenvalue() > 0.0)) throw DomainError("singular covariance matrix");
  const Matrix& v = dec.eigenvectors();
  return v * dec.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
}

// Sigma^{-1} X by Cholesky; DomainError when Sigma is not positive definite.
Matrix solve_spd(const Matrix& sigma, const Matrix& x, const char* what) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + ": covariance matrix is singular or not positive definite");
  }
  return llt.solve(x);
}

struct PathPoint {
  Vector theta;  // aligned to the reference eigenvector
  double derivative_inner = 0.0;  // <H theta_t, C_t u>
};

PathPoint path_point(const SpectralDecomposition& ref, int r, const Vector& theta0,
                     const Matrix& sigma, const SymMatrix& h, const Vector& u, double n, double t) {
  const SymMatrix sigma_t = SymMatrix::symmetrized(sigma + (t / std::sqrt(n)) * h.matrix());
  const SpectralDecomposition dec_t = decompose(sigma_t);
  matched_projector(ref, r, dec_t);  // crossing checks
  const int first = ref.group(r).first;
  const int r_t = dec_t.group_of_index(first);
  PathPoint out;
  out.theta = align(Vector(dec_t.eigenvectors().col(first)), theta0);
  out.derivative_inner = (h.matrix() * out.theta).dot(apply_reduced_resolvent(dec_t, r_t, u));
  return out;
}

}  // namespace

std::vector<std::string> Admissibility::failed() const {
  std::vector<std::string> out;
  if (!cond_H) out.emplace_back("cond_H");
  if (!cond_delta_1) out.emplace_back("cond_delta_1");
  if (!cond_delta_2) out.emplace_back("cond_delta_2");
  if (!cond_HH) out.emplace_back("cond_HH");
  if (!assump_XYZ) out.emplace_back("assump_XYZ");
  return out;
}

SymMatrix b_matrix(const SpectralDecomposition& dec, int r, const Vector& u) {
  require_u(u, dec.dim(), "b_matrix");
  const Matrix inv_root = inverse_sqrt_matrix(dec);
  const Vector theta = dec.eigenvector(r);
  const Vector cu = apply_reduced_resolvent(dec, r, u);
  const Matrix& v = dec.eigenvectors();
  const Matrix sigma = v * dec.eigenvalues().asDiagonal() * v.transpose();
  const Vector a = sigma * theta;
  const Vector b = sigma * cu;
  const SymMatrix out = SymMatrix::symmetrized(0.5 * (a * b.transpose() + b * a.transpose()));

  const double lhs = 2.0 * (inv_root * out.matrix() * inv_root).squaredNorm();
  const double sigma2 = variance_true(dec, r, u);
  const double norm = dec.operator_norm();
  const double gap = spectral_gaps(dec, r).gap;
  const double scale = norm * norm / (gap * gap) * u.squaredNorm();
  if (std::abs(lhs - sigma2) > 1e-8 * std::max(std::abs(sigma2), 1e-6 * scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "2||Sigma^{-1/2} B Sigma^{-1/2}||_2^2 = " << lhs << " vs sigma_r^2 = " << sigma2;
    throw NumericalError("b_matrix: identity check failed", os.str());
  }
  return out;
}

double fisher_info(const SymMatrix& sigma_t, const SymMatrix& h) {
  if (sigma_t.dim() != h.dim()) throw ValidationError("fisher_info: dimension mismatch");
  const Matrix x = solve_spd(sigma_t.matrix(), h.matrix(), "fisher_info");
  // tr(X X) for X = Sigma^{-1} H
  return 0.5 * (x.array() * x.transpose().array()).sum();
}

VanTreesResult van_trees_bound(const CovarianceModel& model, int r, const Vector& u, double n,
                               double c, const VanTreesOptions& options) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("van_trees_bound: n must be >= 1");
  const CosinePrior prior(c);
  const auto& dec = model.dec();
  require_u(u, dec.dim(), "van_trees_bound");
  if (!(dec.min_eigenvalue() > 0.0)) throw DomainError("van_trees_bound: singular covariance");

  const SymMatrix b = b_matrix(dec, r, u);
  const Matrix inv_root = inverse_sqrt_matrix(dec);
  const Matrix sinv_b = solve_spd(model.sigma().matrix(), b.matrix(), "van_trees_bound");
  const SpectralGaps gaps = spectral_gaps(dec, r);
  const double g = gaps.gap;
  const double sigma_norm = dec.operator_norm();
  const double u_norm = u.norm();
  const double b_op = schatten_norm(b, Schatten::kOperator);
  const double b_nuc = schatten_norm(b, Schatten::kNuclear);
  const double sinv_b_fro = sinv_b.norm();
  const double sinv_b_op =
      sinv_b.rows() > 0 ? Eigen::BDCSVD<Matrix>(sinv_b).singularValues()(0) : 0.0;
  const double root_n = std::sqrt(n);
  const double x = c / root_n;

  VanTreesResult out;
  out.sigma2 = variance_true(dec, r, u);
  out.b_norm = (inv_root * b.matrix() * inv_root).squaredNorm();
  out.j_pi = CosinePrior::base_information();
  out.prior_term = prior.information();
  out.numerator_term = x * b_op * b_op * u_norm / (2.0 * g * g);
  out.fisher_term = 3.0 * x * sinv_b_fro * sinv_b_fro * sinv_b_fro;
  out.numerator = out.numerator_term + out.fisher_term + out.prior_term;
  out.denominator = out.sigma2 / 4.0 + out.fisher_term + out.prior_term;
  out.first_factor = 1.0 - out.numerator / out.denominator;

  Admissibility& adm = out.admissibility;
  const double inv_norm_inv = dec.min_eigenvalue();
  adm.delta = std::min(inv_norm_inv, gaps.min_gap / 4.0) / 2.0;
  adm.h_nuclear_term = x * b_nuc;
  adm.inverse_term = x * sinv_b_op;
  adm.cond_H = adm.h_nuclear_term < adm.delta;
  adm.cond_delta_1 = adm.delta < inv_norm_inv;
  adm.cond_delta_2 = adm.delta < gaps.min_gap / 4.0;
  adm.cond_HH = adm.inverse_term <= 0.5;

  if (out.sigma2 > 0.0) {
    adm.xyz_term = std::pow(sigma_norm / g, 4) * x * u_norm * u_norm * u_norm / out.sigma2;
    out.sigma_term = sigma_norm * sigma_norm / (g * g * g) * x * b_op * u_norm * u_norm / out.sigma2;
    adm.assump_XYZ = adm.xyz_term <= 1.0;
    out.second_factor = 1.0 - out.sigma_term;
  } else {
    adm.xyz_term = std::numeric_limits<double>::infinity();
    out.sigma_term = std::numeric_limits<double>::infinity();
    adm.assump_XYZ = false;
    out.second_factor = 0.0;
  }
  out.bound = out.sigma2 * std::max(out.first_factor, 0.0) * std::max(out.second_factor, 0.0);

  if (options.class_constants) {
    const double a = options.class_constants->a;
    const double s0 = options.class_constants->sigma0;
    if (!(a > 0.0) || !(s0 > 0.0)) throw ValidationError("van_trees_bound: class constants must be positive");
    const double u3 = u_norm * u_norm * u_norm;
    const double shared = 3.0 * std::pow(a, 3) * u3 * x + out.prior_term;
    const double first = 1.0 - (std::pow(a, 4) * u3 * x + shared) / (s0 * s0 / 4.0 + shared);
    const double second = 1.0 - std::pow(a, 4) * u3 * x / (s0 * s0);
    out.class_ratio = first * second;
  }

  if (options.enforce_admissibility && !adm.ok()) {
    std::ostringstream os;
    os << "van_trees_bound: admissibility conditions failed:";
    for (const auto& name : adm.failed()) os << ' ' << name;
    os << " (c ||B||_1 / sqrt(n) = " << adm.h_nuclear_term << ", delta = " << adm.delta
       << ", c ||Sigma^{-1} B|| / sqrt(n) = " << adm.inverse_term << ")";
    throw AdmissibilityError(os.str(), adm.failed());
  }
  return out;
}

double van_trees_integral_bound(const CovarianceModel& model, int r, const Vector& u, double n,
                                double c) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("van_trees_integral_bound: n must be >= 1");
  const CosinePrior prior(c);
  const auto& dec = model.dec();
  require_u(u, dec.dim(), "van_trees_integral_bound");
  const SymMatrix b = b_matrix(dec, r, u);
  const Vector theta0 = dec.eigenvector(r);
  const Matrix& sigma = model.sigma().matrix();
  const double root_n = std::sqrt(n);

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double num = Quad::integrate(
      [&](double t) {
        return path_point(dec, r, theta0, sigma, b, u, n, t).derivative_inner * prior.density(t);
      },
      -c, c, 10, 1e-12);
  const double info = Quad::integrate(
      [&](double t) {
        const SymMatrix sigma_t = SymMatrix::symmetrized(sigma + (t / root_n) * b.matrix());
        return fisher_info(sigma_t, b) * prior.density(t);
      },
      -c, c, 10, 1e-12);
  return num * num / (info + prior.information());
}

DerivativeCheck g_derivative_check(const CovarianceModel& model, int r, const Vector& u,
                                   const SymMatrix& h, double n, double t) {
  if (!(n > 0.0)) throw ValidationError("g_derivative_check: n must be positive");
  const auto& dec = model.dec();
  require_u(u, dec.dim(), "g_derivative_check");
  if (h.dim() != dec.dim()) throw ValidationError("g_derivative_check: H dimension mismatch");
  const Vector theta0 = dec.eigenvector(r);
  const Matrix& sigma = model.sigma().matrix();

  const PathPoint at = path_point(dec, r, theta0, sigma, h, u, n, t);
  const double step = 1e-6 * (1.0 + std::abs(t));
  const PathPoint hi = path_point(dec, r, theta0, sigma, h, u, n, t + step);
  const PathPoint lo = path_point(dec, r, theta0, sigma, h, u, n, t - step);

  DerivativeCheck out;
  out.analytic = at.derivative_inner / std::sqrt(n);
  out.numeric = (hi.theta.dot(u) - lo.theta.dot(u)) / (2.0 * step);
  return out;
}

}  // namespace pcadb
