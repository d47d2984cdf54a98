#include "pcadb/estimators.hpp"

#include "pcadb/errors.hpp"
#include "pcadb/normal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcadb {

namespace {

// Literal d x d evaluation of the D form up to this dimension.
constexpr int kDenseFormLimit = 256;

void require_u(const Vector& u, int d, const char* what) {
  if (u.size() != d) {
    std::ostringstream os;
    os << what << ": u has dimension " << u.size() << ", expected " << d;
    throw ValidationError(os.str());
  }
  if (!u.allFinite()) throw ValidationError(std::string(what) + ": u has a non-finite entry");
}

Vector apply_sigma(const SpectralDecomposition& dec, const Vector& x) {
  const Matrix& v = dec.eigenvectors();
  return v * (dec.eigenvalues().array() * (v.transpose() * x).array()).matrix();
}

}  // namespace

double variance_true(const SpectralDecomposition& dec, int r, const Vector& u) {
  require_u(u, dec.dim(), "variance_true");
  const auto& g = dec.group(r);
  if (g.multiplicity != 1) {
    std::ostringstream os;
    os << "variance_true: mu_" << r << " has multiplicity " << g.multiplicity;
    throw MultiplicityError(os.str(), g.multiplicity);
  }
  const Vector theta = dec.eigenvector(r);
  const Vector cu = apply_reduced_resolvent(dec, r, u);
  const double sum_form = g.value * apply_sigma(dec, cu).dot(cu);

  double d_form = 0.0;
  if (dec.dim() <= kDenseFormLimit) {
    const Matrix& v = dec.eigenvectors();
    const Matrix root = v * dec.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * v.transpose();
    const Matrix dmat = theta * cu.transpose() + cu * theta.transpose();
    d_form = 0.5 * (root * dmat * root).squaredNorm();
  } else {
    // ||x y^T + y x^T||_2^2 = 2 ||x||^2 ||y||^2 + 2 <x, y>^2
    const Vector x = apply_sqrt(dec, theta);
    const Vector y = apply_sqrt(dec, cu);
    const double xy = x.dot(y);
    d_form = x.squaredNorm() * y.squaredNorm() + xy * xy;
  }

  const double norm = dec.operator_norm();
  const double gap = spectral_gaps(dec, r).gap;
  const double scale = norm * norm / (gap * gap) * u.squaredNorm();
  if (std::abs(sum_form - d_form) > 1e-10 * std::max(std::abs(sum_form), 1e-6 * scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "sum form " << sum_form << " vs D form " << d_form;
    throw NumericalError("variance_true: closed forms disagree", os.str());
  }
  return sum_form;
}

double variance_estimate(const SymMatrix& sigma_hat, int r, const Vector& u) {
  return std::sqrt(std::max(variance_true(decompose(sigma_hat), r, u), 0.0));
}

double variance_estimate(const SampleSet& samples, int r, const Vector& u) {
  return variance_estimate(sample_covariance(samples), r, u);
}

PluginEstimate plugin_estimate(const SpectralDecomposition& sigma_hat, int r, double tau,
                               const Vector& u) {
  require_u(u, sigma_hat.dim(), "plugin_estimate");
  const ClusterVector cv = empirical_eigenvector(sigma_hat, r, tau);
  PluginEstimate out;
  out.theta_hat = cv.eigvec;
  out.value = cv.eigvec.dot(u);
  out.delta = cv.delta;
  out.r = r;
  out.cluster = cv.cluster;
  return out;
}

PluginEstimate plugin_estimate(const SampleSet& samples, int r, double tau, const Vector& u) {
  return plugin_estimate(decompose(sample_covariance(samples)), r, tau, u);
}

SplitSizes split_sizes(int n, double r_hat) {
  if (n < 12) {
    std::ostringstream os;
    os << "split_sizes: n = " << n << " is below the minimum of 12";
    throw ValidationError(os.str());
  }
  if (!(r_hat >= 1.0) || !std::isfinite(r_hat)) {
    throw ValidationError("split_sizes: r_hat must be finite and >= 1");
  }
  const double raw = std::pow(static_cast<double>(n), 0.75) * std::pow(r_hat, 0.25);
  // Guard against pow landing a hair above an exact integer.
  const double m_raw = std::ceil(raw - 1e-9 * raw);
  const int upper = n / 4;
  SplitSizes out;
  out.clamped = m_raw < 4.0 || m_raw > upper;
  out.m = static_cast<int>(std::clamp(m_raw, 4.0, static_cast<double>(upper)));
  out.n_prime = n - 2 * out.m;
  return out;
}

DebiasFactor debias_factor(const Vector& t1, const Vector& t2, const Vector& t3) {
  if (t1.size() != t2.size() || t2.size() != t3.size()) {
    throw ValidationError("debias_factor: dimension mismatch");
  }
  const double inner23 = t2.dot(t3);
  DebiasFactor out;
  out.floor_engaged = inner23 < kDebiasFloor;
  out.value = t1.dot(t2) / std::sqrt(std::max(inner23, kDebiasFloor));
  return out;
}

DebiasedEstimate debiased_estimate(const SampleSet& samples, int r, double tau, const Vector& u,
                                   std::optional<int> m) {
  const int n = static_cast<int>(samples.data.rows());
  if (n < 12) {
    std::ostringstream os;
    os << "debiased_estimate: n = " << n << " is below the minimum of 12";
    throw ValidationError(os.str());
  }
  require_u(u, static_cast<int>(samples.data.cols()), "debiased_estimate");

  const SpectralDecomposition full = decompose(sample_covariance(samples.data));
  DebiasedEstimate out;
  out.r_hat = effective_rank(full);

  if (m) {
    if (*m < 1 || n - 2 * *m <= 0 || 3 * (n - 2 * *m) <= n) {
      std::ostringstream os;
      os << "debiased_estimate: m = " << *m << " violates n' = n - 2m > n/3 for n = " << n;
      throw ValidationError(os.str());
    }
    out.m = *m;
    out.n_prime = n - 2 * *m;
  } else {
    const SplitSizes s = split_sizes(n, std::max(out.r_hat, 1.0));
    out.m = s.m;
    out.n_prime = s.n_prime;
  }

  const int starts[3] = {0, out.n_prime, out.n_prime + out.m};
  const int sizes[3] = {out.n_prime, out.m, out.m};
  Vector t[3];
  for (int j = 0; j < 3; ++j) {
    try {
      const SymMatrix cov = sample_covariance(samples.data.middleRows(starts[j], sizes[j]));
      t[j] = empirical_eigenvector(decompose(cov), r, tau).eigvec;
    } catch (const ClusterNotFoundError& e) {
      throw EstimationError("debiased_estimate: subsample " + std::to_string(j + 1) + ": " + e.what(),
                            j + 1);
    } catch (const MultiplicityError& e) {
      throw EstimationError("debiased_estimate: subsample " + std::to_string(j + 1) + ": " + e.what(),
                            j + 1);
    }
  }
  t[1] = align(t[1], t[0]);
  t[2] = align(t[2], t[0]);

  const DebiasFactor f = debias_factor(t[0], t[1], t[2]);
  out.d_check = f.value;
  out.floor_engaged = f.floor_engaged;
  out.clamped = f.value < 0.5;
  out.theta_hat1 = t[0];
  out.theta_check = t[0] / std::max(f.value, 0.5);
  out.value = out.theta_check.dot(u);
  out.sigma_hat = std::sqrt(std::max(variance_true(full, r, u), 0.0));
  return out;
}

Interval confidence_interval(double value, double sigma_hat, int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "confidence_interval: alpha = " << alpha << " outside (0, 1)";
    throw ValidationError(os.str());
  }
  if (!(sigma_hat >= 0.0)) throw ValidationError("confidence_interval: sigma_hat must be >= 0");
  if (n < 1) throw ValidationError("confidence_interval: n must be >= 1");
  const double half = normal_quantile(1.0 - alpha / 2.0) * sigma_hat / std::sqrt(static_cast<double>(n));
  return {value - half, value + half};
}

VariancePerturbation variance_perturbation_check(const SpectralDecomposition& dec, int r,
                                                 const Vector& u, const SymMatrix& e) {
  if (e.dim() != dec.dim()) throw ValidationError("variance_perturbation_check: dimension mismatch");
  const auto& g = dec.group(r);
  const double gap = spectral_gaps(dec, r).gap;
  const double e_norm = schatten_norm(e, Schatten::kOperator);
  if (e_norm > gap / 4.0) {
    std::ostringstream os;
    os << "variance_perturbation_check: ||E|| = " << e_norm << " exceeds g_r / 4 = " << gap / 4.0;
    throw ValidationError(os.str());
  }

  // Both sides go through the same reconstruction so E = 0 gives exactly 0.
  const SymMatrix sigma = SymMatrix::symmetrized(dec.reconstruct());
  const SpectralDecomposition base = decompose(sigma);
  const SpectralDecomposition pert = decompose(sigma + e);
  const int r_base = base.group_of_index(g.first);
  const int r_pert = pert.group_of_index(g.first);

  VariancePerturbation out;
  out.lhs = std::abs(variance_true(pert, r_pert, u) - variance_true(base, r_base, u));
  const double norm = dec.operator_norm();
  out.rhs_shape = norm * norm / (gap * gap) * (e_norm / gap) * u.squaredNorm();
  return out;
}

Loss Loss::huber(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("huber loss: k must be positive");
  return {Kind::kHuber, k};
}

double Loss::operator()(double x) const {
  const double a = std::abs(x);
  switch (kind) {
    case Kind::kSquared:
      return x * x;
    case Kind::kAbsolute:
      return a;
    case Kind::kHuber:
      return a <= k ? 0.5 * x * x : k * (a - 0.5 * k);
  }
  return 0.0;
}

std::string Loss::name() const {
  switch (kind) {
    case Kind::kSquared:
      return "squared";
    case Kind::kAbsolute:
      return "absolute";
    case Kind::kHuber: {
      std::ostringstream os;
      os.precision(17);
      os << "huber(" << k << ")";
      return os.str();
    }
  }
  return {};
}

Loss parse_loss(const std::string& text) {
  if (text == "squared") return Loss::squared();
  if (text == "absolute") return Loss::absolute();
  if (text.rfind("huber(", 0) == 0 && text.size() > 7 && text.back() == ')') {
    const std::string inner = text.substr(6, text.size() - 7);
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == inner.size() && used > 0) return Loss::huber(k);
  }
  throw ValidationError("unknown loss '" + text + "' (expected squared, absolute or huber(<k>))");
}

}  // namespace pcadb
