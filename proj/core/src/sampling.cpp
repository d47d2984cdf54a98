#include "pcadb/sampling.hpp"

#include "pcadb/errors.hpp"
#include "pcadb/rng.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace pcadb {

namespace {
ModelMeta family_meta(const char* family) {
  ModelMeta meta;
  meta.family = family;
  return meta;
}
}  // namespace

CovarianceModel make_model(const SymMatrix& s) { return make_model(s, family_meta("matrix")); }

CovarianceModel make_model(const SymMatrix& s, ModelMeta meta) {
  CovarianceModel model;
  model.dec_ = decompose(s);
  const double norm = model.dec_.operator_norm();
  const double min_eig = model.dec_.min_eigenvalue();
  if (min_eig < -1e-10 * norm) {
    std::ostringstream os;
    os << "make_model: matrix is not positive semidefinite (min eigenvalue " << min_eig << ")";
    throw NotPsdError(os.str(), min_eig);
  }
  const Matrix& v = model.dec_.eigenvectors();
  const Vector root = model.dec_.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  model.sqrt_ = v * root.asDiagonal() * v.transpose();
  model.sqrt_ = 0.5 * (model.sqrt_ + model.sqrt_.transpose()).eval();

  const Matrix& m = s.matrix();
  model.diagonal_ = (m - Matrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (model.diagonal_) model.sqrt_ = Matrix(m.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal());

  model.sigma_ = s;
  model.meta_ = std::move(meta);
  return model;
}

double prop32_effective_rank(int r, double a, int tail_dim) {
  double sum = 0.0;
  for (int s = 1; s <= r; ++s) sum += 1.0 - (s - 1) / a;
  return sum + (1.0 - r / a) * tail_dim;
}

CovarianceModel prop32_model(int r, double a, int tail_dim, double mu1) {
  if (r < 1) throw ValidationError("prop32_model: r must be >= 1");
  if (!(a > r)) {
    std::ostringstream os;
    os << "prop32_model: need a > r (got a = " << a << ", r = " << r << ")";
    throw ValidationError(os.str());
  }
  if (tail_dim < 1) throw ValidationError("prop32_model: tail dimension d must be >= 1");
  if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw ValidationError("prop32_model: mu1 must be positive");

  Vector diag(r + tail_dim);
  for (int s = 1; s <= r; ++s) diag(s - 1) = mu1 * (1.0 - (s - 1) / a);
  diag.tail(tail_dim).setConstant(mu1 * (1.0 - r / a));

  ModelMeta meta;
  meta.family = "prop32";
  meta.r = r;
  meta.a = a;
  meta.tail_dim = tail_dim;
  meta.mu1 = mu1;
  meta.closed_form_effective_rank = prop32_effective_rank(r, a, tail_dim);
  return make_model(SymMatrix::diagonal(diag), std::move(meta));
}

CovarianceModel spiked_model(const std::vector<double>& spikes, double noise, int d) {
  if (d < static_cast<int>(spikes.size()) || d < 1) {
    throw ValidationError("spiked_model: dimension smaller than the number of spikes");
  }
  if (!(noise >= 0.0)) throw ValidationError("spiked_model: noise variance must be >= 0");
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (!(spikes[i] > 0.0)) throw ValidationError("spiked_model: spikes must be positive");
    if (i > 0 && !(spikes[i] < spikes[i - 1])) {
      throw ValidationError("spiked_model: spikes must be strictly descending");
    }
  }
  Vector diag = Vector::Constant(d, noise);
  for (std::size_t i = 0; i < spikes.size(); ++i) diag(static_cast<Eigen::Index>(i)) += spikes[i];

  ModelMeta meta;
  meta.family = "spiked";
  meta.spikes = spikes;
  meta.noise = noise;
  return make_model(SymMatrix::diagonal(diag), std::move(meta));
}

CovarianceModel diagonal_model(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("diagonal_model: empty diagonal");
  return make_model(SymMatrix::diagonal(std::span<const double>(values)), family_meta("diagonal"));
}

namespace {

struct SpecBuilder {
  CovarianceModel operator()(const MatrixSpec& s) const {
    const auto d = static_cast<Eigen::Index>(s.rows.size());
    if (d == 0) throw ValidationError("matrix model: no rows");
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& row = s.rows[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw ValidationError("matrix model: matrix is not square");
      }
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return make_model(SymMatrix(std::move(m)));
  }
  CovarianceModel operator()(const DiagonalSpec& s) const { return diagonal_model(s.values); }
  CovarianceModel operator()(const Prop32Spec& s) const {
    return prop32_model(s.r, s.a, s.d, s.mu1);
  }
  CovarianceModel operator()(const SpikedSpec& s) const {
    return spiked_model(s.spikes, s.noise, s.d);
  }
};

struct FamilyName {
  std::string operator()(const MatrixSpec&) const { return "matrix"; }
  std::string operator()(const DiagonalSpec&) const { return "diagonal"; }
  std::string operator()(const Prop32Spec&) const { return "prop32"; }
  std::string operator()(const SpikedSpec&) const { return "spiked"; }
};

}  // namespace

CovarianceModel make_model(const ModelSpec& spec) { return std::visit(SpecBuilder{}, spec); }

std::string family_name(const ModelSpec& spec) { return std::visit(FamilyName{}, spec); }

SampleSet draw(const CovarianceModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("draw: n must be >= 1");
  const int d = model.dim();
  Matrix z(n, d);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed_derive(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < d; ++j) z(i, j) = normal(rng);
  }
  SampleSet out;
  out.n = n;
  out.dim = d;
  out.seed = seed;
  if (model.is_diagonal()) {
    out.data = z * model.sqrt().diagonal().asDiagonal();
  } else {
    // rows are Z_i^T Sigma^{1/2}, i.e. (Sigma^{1/2} Z_i)^T
    out.data = z * model.sqrt();
  }
  return out;
}

Matrix random_orthogonal(int d, std::uint64_t seed) {
  if (d < 1) throw ValidationError("random_orthogonal: d must be >= 1");
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

SampleSet sample_set_from_rows(Matrix rows) {
  if (rows.rows() < 1 || rows.cols() < 1) throw ValidationError("sample set: empty data");
  if (!rows.allFinite()) throw ValidationError("sample set: non-finite entry in data");
  SampleSet out;
  out.n = static_cast<int>(rows.rows());
  out.dim = static_cast<int>(rows.cols());
  out.data = std::move(rows);
  return out;
}

SymMatrix sample_covariance(const Eigen::Ref<const Matrix>& rows) {
  if (rows.rows() < 1) throw ValidationError("sample_covariance: empty sample");
  const auto d = rows.cols();
  Matrix cov = Matrix::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose(), 1.0 / static_cast<double>(rows.rows()));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return SymMatrix(std::move(cov), 0.0);
}

SymMatrix sample_covariance(const SampleSet& samples) {
  if (samples.n < 1 || samples.data.rows() < 1) throw ValidationError("sample_covariance: empty sample");
  return sample_covariance(samples.data);
}

}  // namespace pcadb
