#include "pcadb/perturbation.hpp"

#include "pcadb/errors.hpp"
#include "pcadb/replicate.hpp"
#include "pcadb/rng.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace pcadb {

namespace {

void require_dim(const SpectralDecomposition& dec, const SymMatrix& e, const char* what) {
  if (e.dim() != dec.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << dec.dim() << " vs " << e.dim() << ")";
    throw ValidationError(os.str());
  }
}

void require_dim(const SpectralDecomposition& dec, const Vector& u, const char* what) {
  if (u.size() != dec.dim()) {
    std::ostringstream os;
    os << what << ": vector has dimension " << u.size() << ", expected " << dec.dim();
    throw ValidationError(os.str());
  }
}

const DistinctEigenvalue& simple_group(const SpectralDecomposition& dec, int r, const char* what) {
  const auto& g = dec.group(r);
  if (g.multiplicity != 1) {
    std::ostringstream os;
    os << what << ": eigenvalue mu_" << r << " has multiplicity " << g.multiplicity;
    throw MultiplicityError(os.str(), g.multiplicity);
  }
  return g;
}

// Literal matrix products up to this dimension, eigen-coordinates above.
constexpr int kDenseTraceLimit = 256;

}  // namespace

SymMatrix linear_term(const SpectralDecomposition& dec, int r, const SymMatrix& e) {
  require_dim(dec, e, "linear_term");
  const Matrix p = dec.projector(r);
  const Matrix c = reduced_resolvent(dec, r).matrix();
  const Matrix pec = p * e.matrix() * c;
  return SymMatrix::symmetrized(pec + pec.transpose());
}

double linear_form(const SpectralDecomposition& dec, int r, const SymMatrix& e, const Vector& u) {
  require_dim(dec, e, "linear_form");
  require_dim(dec, u, "linear_form");
  simple_group(dec, r, "linear_form");
  const Vector theta = dec.eigenvector(r);
  return (e.matrix() * theta).dot(apply_reduced_resolvent(dec, r, u));
}

Matrix matched_projector(const SpectralDecomposition& reference, int r,
                         const SpectralDecomposition& perturbed) {
  if (reference.dim() != perturbed.dim()) {
    throw ValidationError("matched_projector: dimension mismatch");
  }
  const auto& g = reference.group(r);
  const Vector& lhat = perturbed.eigenvalues();
  const int d = perturbed.dim();
  const double tie_tol = kDefaultGroupTolerance * (1.0 + perturbed.operator_norm());

  if (g.first > 0 && lhat(g.first - 1) - lhat(g.first) <= tie_tol) {
    throw MatchingError("matched_projector: perturbed eigenvalue tie across the upper boundary of Delta_r");
  }
  if (g.last() < d - 1 && lhat(g.last()) - lhat(g.last() + 1) <= tie_tol) {
    throw MatchingError("matched_projector: perturbed eigenvalue tie across the lower boundary of Delta_r");
  }
  for (int j = g.first; j <= g.last(); ++j) {
    const double own = std::abs(lhat(j) - g.value);
    for (const auto& other : reference.groups()) {
      if (other.first == g.first) continue;
      if (std::abs(lhat(j) - other.value) < own) {
        std::ostringstream os;
        os << "matched_projector: perturbed eigenvalue " << lhat(j) << " at index " << j
           << " is closer to mu = " << other.value << " than to mu_" << r << " = " << g.value;
        throw MatchingError(os.str());
      }
    }
  }
  const auto block = perturbed.eigenvectors().middleCols(g.first, g.multiplicity);
  return block * block.transpose();
}

PerturbationReport remainder(const SpectralDecomposition& dec, int r, const SymMatrix& e) {
  require_dim(dec, e, "remainder");
  const SymMatrix sigma = SymMatrix::symmetrized(dec.reconstruct());
  const SpectralDecomposition perturbed = decompose(sigma + e);

  PerturbationReport out;
  out.projector_hat = matched_projector(dec, r, perturbed);
  out.linear = linear_term(dec, r, e).matrix();
  out.remainder = out.projector_hat - dec.projector(r) - out.linear;
  out.e_norm = schatten_norm(e, Schatten::kOperator);
  return out;
}

PerturbationReport remainder(const SpectralDecomposition& dec, int r, const SymMatrix& e,
                             const Vector& u, double b_r) {
  PerturbationReport out = remainder(dec, r, e);
  out.rho_u = rho(dec, r, out.projector_hat, b_r, u);
  return out;
}

double rho(const SpectralDecomposition& dec, int r, const Matrix& p_hat, double b_r,
           const Vector& u) {
  require_dim(dec, u, "rho");
  simple_group(dec, r, "rho");
  if (!(b_r >= -1.0 && b_r <= 0.0)) throw ValidationError("rho: b_r must lie in [-1, 0]");
  if (p_hat.rows() != dec.dim() || p_hat.cols() != dec.dim()) {
    throw ValidationError("rho: projector dimension mismatch");
  }
  const Vector theta = dec.eigenvector(r);
  return (p_hat * theta - (1.0 + b_r) * theta).dot(u);
}

double a_r(const SpectralDecomposition& dec, int r) {
  const auto& g = simple_group(dec, r, "a_r");
  if (dec.group_count() < 2) throw DomainError("a_r: only one distinct eigenvalue");

  const double mu_r = g.value;
  double sum_form = 0.0;
  for (const auto& other : dec.groups()) {
    if (other.first == g.first) continue;
    const double diff = mu_r - other.value;
    sum_form += mu_r * other.value * other.multiplicity / (diff * diff);
  }
  sum_form *= 2.0;

  double trace_form = 0.0;
  if (dec.dim() <= kDenseTraceLimit) {
    const Matrix sigma = dec.reconstruct();
    const Matrix p = dec.projector(r);
    const Matrix c = reduced_resolvent(dec, r).matrix();
    trace_form = 2.0 * (p * sigma * p).trace() * (c * sigma * c).trace();
  } else {
    const Vector& lambda = dec.eigenvalues();
    double tp = 0.0;
    double tc = 0.0;
    for (const auto& other : dec.groups()) {
      for (int j = other.first; j <= other.last(); ++j) {
        if (other.first == g.first) {
          tp += lambda(j);
        } else {
          const double w = 1.0 / (mu_r - other.value);
          tc += w * w * lambda(j);
        }
      }
    }
    trace_form = 2.0 * tp * tc;
  }

  if (std::abs(trace_form - sum_form) > 1e-10 * std::max(std::abs(sum_form), 1e-300)) {
    std::ostringstream os;
    os.precision(17);
    os << "sum form " << sum_form << " vs trace form " << trace_form;
    throw NumericalError("a_r: trace and sum forms disagree", os.str());
  }
  return sum_form;
}

double bias_approx(const SpectralDecomposition& dec, int r, int n) {
  if (n < 1) throw ValidationError("bias_approx: n must be >= 1");
  return -a_r(dec, r) / (2.0 * n);
}

BiasEstimate bias_oracle_mc(const CovarianceModel& model, int r, int n, int reps,
                            std::uint64_t seed, int jobs) {
  if (reps < 2) throw ValidationError("bias_oracle_mc: reps must be >= 2");
  if (n < 1) throw ValidationError("bias_oracle_mc: n must be >= 1");
  const auto& dec = model.dec();
  const auto& g = simple_group(dec, r, "bias_oracle_mc");
  const Vector theta = dec.eigenvector(r);

  const std::vector<double> values = parallel_map(
      reps,
      [&](int k) {
        const SampleSet xs = draw(model, n, seed_derive(seed, static_cast<std::uint64_t>(k)));
        const SpectralDecomposition hat = decompose(sample_covariance(xs));
        const double c = hat.eigenvectors().col(g.first).dot(theta);
        return c * c - 1.0;
      },
      jobs);

  const MeanAndError agg = mean_and_error(values);
  BiasEstimate out;
  out.value = agg.mean;
  out.std_error = agg.std_error;
  out.reps = reps;
  out.theoretical = bias_approx(dec, r, n);
  return out;
}

LinearTermEnergy linear_term_energy_mc(const CovarianceModel& model, int r, int n, int reps,
                                       std::uint64_t seed, int jobs) {
  if (reps < 2) throw ValidationError("linear_term_energy_mc: reps must be >= 2");
  const auto& dec = model.dec();
  const Matrix p = dec.projector(r);
  const Matrix c = reduced_resolvent(dec, r).matrix();
  const Matrix& sigma = model.sigma().matrix();

  const std::vector<double> values = parallel_map(
      reps,
      [&](int k) {
        const SampleSet xs = draw(model, n, seed_derive(seed, static_cast<std::uint64_t>(k)));
        const Matrix e = sample_covariance(xs).matrix() - sigma;
        const Matrix pec = p * e * c;
        return (pec + pec.transpose()).squaredNorm();
      },
      jobs);

  const MeanAndError agg = mean_and_error(values);
  LinearTermEnergy out;
  out.mean = agg.mean;
  out.std_error = agg.std_error;
  out.reps = reps;
  out.theoretical = a_r(dec, r) / n;
  return out;
}

}  // namespace pcadb
