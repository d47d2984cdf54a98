#include "pcadb/spectral.hpp"

#include "pcadb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace pcadb {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows()
       << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": matrix has non-finite entries");
  }
}

std::string condition_diagnostics(const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  os << "dim=" << m.rows() << " frobenius=" << m.norm()
     << " max_abs_entry=" << m.cwiseAbs().maxCoeff()
     << " asymmetry=" << (m - m.transpose()).cwiseAbs().maxCoeff();
  return os.str();
}

// Largest-magnitude entry positive; the first index wins ties.
void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

// --- SymMatrix -------------------------------------------------------------

SymMatrix::SymMatrix(Matrix m, double tol) {
  require_square(m, "SymMatrix");
  require_finite(m, "SymMatrix");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    std::ostringstream os;
    os << "SymMatrix: matrix is not symmetric (max |A_ij - A_ji| = " << asym
       << " > " << tol << ")";
    throw ValidationError(os.str());
  }
  m_ = std::move(m);
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  require_square(m, "SymMatrix::symmetrized");
  require_finite(m, "SymMatrix::symmetrized");
  return SymMatrix(Matrix(0.5 * (m + m.transpose())), Unchecked{});
}

SymMatrix SymMatrix::zero(int dim) {
  if (dim <= 0) throw ValidationError("SymMatrix::zero: dim must be positive");
  return SymMatrix(Matrix::Zero(dim, dim), Unchecked{});
}

SymMatrix SymMatrix::identity(int dim) {
  if (dim <= 0) throw ValidationError("SymMatrix::identity: dim must be positive");
  return SymMatrix(Matrix::Identity(dim, dim), Unchecked{});
}

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return diagonal(v);
}

SymMatrix SymMatrix::diagonal(const Vector& values) {
  if (values.size() == 0) throw ValidationError("SymMatrix::diagonal: empty diagonal");
  if (!values.allFinite()) throw ValidationError("SymMatrix::diagonal: non-finite entry");
  return SymMatrix(Matrix(values.asDiagonal()), Unchecked{});
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  if (dim() != other.dim()) throw ValidationError("SymMatrix: dimension mismatch in +");
  return SymMatrix(Matrix(m_ + other.m_), Unchecked{});
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  if (dim() != other.dim()) throw ValidationError("SymMatrix: dimension mismatch in -");
  return SymMatrix(Matrix(m_ - other.m_), Unchecked{});
}

SymMatrix SymMatrix::operator*(double c) const {
  return SymMatrix(Matrix(c * m_), Unchecked{});
}

// --- SpectralDecomposition -------------------------------------------------

SpectralDecomposition::SpectralDecomposition(Vector eigenvalues,
                                             Matrix eigenvectors,
                                             std::vector<DistinctEigenvalue> groups)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      groups_(std::move(groups)) {}

const DistinctEigenvalue& SpectralDecomposition::group(int r) const {
  if (r < 1 || r > group_count()) {
    std::ostringstream os;
    os << "group rank " << r << " out of range [1, " << group_count() << "]";
    throw IndexError(os.str());
  }
  return groups_[static_cast<std::size_t>(r - 1)];
}

int SpectralDecomposition::group_of_index(int index) const {
  for (int s = 0; s < group_count(); ++s) {
    if (groups_[static_cast<std::size_t>(s)].contains(index)) return s + 1;
  }
  std::ostringstream os;
  os << "eigenvalue index " << index << " out of range [0, " << dim() << ")";
  throw IndexError(os.str());
}

Matrix SpectralDecomposition::basis(int r) const {
  const auto& g = group(r);
  return eigenvectors_.middleCols(g.first, g.multiplicity);
}

Matrix SpectralDecomposition::projector(int r) const {
  const Matrix b = basis(r);
  return b * b.transpose();
}

Vector SpectralDecomposition::eigenvector(int r) const {
  const auto& g = group(r);
  if (g.multiplicity != 1) {
    std::ostringstream os;
    os << "eigenvector requested for group " << r << " of multiplicity "
       << g.multiplicity;
    throw MultiplicityError(os.str(), g.multiplicity);
  }
  return eigenvectors_.col(g.first);
}

Vector SpectralDecomposition::grouped_eigenvalues() const {
  Vector out(dim());
  for (const auto& g : groups_) out.segment(g.first, g.multiplicity).setConstant(g.value);
  return out;
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors_ * grouped_eigenvalues().asDiagonal() * eigenvectors_.transpose();
}

double SpectralDecomposition::operator_norm() const {
  if (dim() == 0) return 0.0;
  return std::max(std::abs(eigenvalues_(0)), std::abs(eigenvalues_(dim() - 1)));
}

double SpectralDecomposition::trace() const { return eigenvalues_.sum(); }

double SpectralDecomposition::min_eigenvalue() const {
  return dim() == 0 ? 0.0 : eigenvalues_(dim() - 1);
}

// --- operations ------------------------------------------------------------

SpectralDecomposition decompose(const SymMatrix& s, double group_tol) {
  if (!(group_tol >= 0.0)) throw ValidationError("decompose: group_tol must be >= 0");
  const Matrix& m = s.matrix();
  const int d = s.dim();
  if (d == 0) throw ValidationError("decompose: empty matrix");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("decompose: symmetric eigensolver did not converge",
                         condition_diagnostics(m));
  }

  // Eigen returns ascending order.
  Vector values = solver.eigenvalues().reverse();
  Matrix vectors = solver.eigenvectors().rowwise().reverse();
  for (int j = 0; j < d; ++j) fix_sign(vectors.col(j));

  const double norm = std::max(std::abs(values(0)), std::abs(values(d - 1)));
  const double tol = group_tol * (1.0 + norm);

  std::vector<DistinctEigenvalue> groups;
  int first = 0;
  for (int j = 1; j <= d; ++j) {
    if (j == d || values(j - 1) - values(j) > tol) {
      const int mult = j - first;
      DistinctEigenvalue g;
      g.first = first;
      g.multiplicity = mult;
      g.value = values.segment(first, mult).mean();
      groups.push_back(g);
      first = j;
    }
  }
  return SpectralDecomposition(std::move(values), std::move(vectors), std::move(groups));
}

double effective_rank(const SpectralDecomposition& dec) {
  const double norm = dec.operator_norm();
  if (!(norm > 0.0)) throw DomainError("effective_rank: zero matrix");
  return dec.trace() / norm;
}

double effective_rank(const SymMatrix& s) { return effective_rank(decompose(s)); }

SpectralGaps spectral_gaps(const SpectralDecomposition& dec, int r) {
  dec.group(r);  // range check
  auto gap_of = [&](int s) {
    const auto& groups = dec.groups();
    if (groups.size() == 1) return std::abs(groups.front().value);
    const double mu = groups[static_cast<std::size_t>(s - 1)].value;
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < groups.size(); ++k) {
      if (static_cast<int>(k) == s - 1) continue;
      g = std::min(g, std::abs(mu - groups[k].value));
    }
    return g;
  };
  SpectralGaps out;
  out.gap = gap_of(r);
  out.min_gap = out.gap;
  for (int s = 1; s < r; ++s) out.min_gap = std::min(out.min_gap, gap_of(s));
  return out;
}

namespace {

Vector resolvent_weights(const SpectralDecomposition& dec, int r) {
  const auto& target = dec.group(r);
  if (dec.group_count() < 2) {
    throw DomainError("reduced resolvent undefined: only one distinct eigenvalue");
  }
  Vector w(dec.dim());
  for (const auto& g : dec.groups()) {
    const double val = (g.first == target.first) ? 0.0 : 1.0 / (target.value - g.value);
    w.segment(g.first, g.multiplicity).setConstant(val);
  }
  return w;
}

}  // namespace

SymMatrix reduced_resolvent(const SpectralDecomposition& dec, int r) {
  const Vector w = resolvent_weights(dec, r);
  const Matrix& v = dec.eigenvectors();
  return SymMatrix::symmetrized(v * w.asDiagonal() * v.transpose());
}

Vector apply_reduced_resolvent(const SpectralDecomposition& dec, int r, const Vector& x) {
  if (x.size() != dec.dim()) throw ValidationError("apply_reduced_resolvent: dimension mismatch");
  const Vector w = resolvent_weights(dec, r);
  const Matrix& v = dec.eigenvectors();
  return v * (w.array() * (v.transpose() * x).array()).matrix();
}

Vector apply_sqrt(const SpectralDecomposition& dec, const Vector& x) {
  if (x.size() != dec.dim()) throw ValidationError("apply_sqrt: dimension mismatch");
  const Vector root = dec.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = dec.eigenvectors();
  return v * (root.array() * (v.transpose() * x).array()).matrix();
}

Vector apply_inverse_sqrt(const SpectralDecomposition& dec, const Vector& x) {
  if (x.size() != dec.dim()) throw ValidationError("apply_inverse_sqrt: dimension mismatch");
  if (!(dec.min_eigenvalue() > 0.0)) throw DomainError("apply_inverse_sqrt: singular matrix");
  const Vector inv_root = dec.eigenvalues().cwiseSqrt().cwiseInverse();
  const Matrix& v = dec.eigenvectors();
  return v * (inv_root.array() * (v.transpose() * x).array()).matrix();
}

Schatten schatten_from_p(double p) {
  if (p == 1.0) return Schatten::kNuclear;
  if (p == 2.0) return Schatten::kFrobenius;
  if (std::isinf(p) && p > 0) return Schatten::kOperator;
  std::ostringstream os;
  os << "schatten_norm: unsupported p = " << p << " (expected 1, 2 or inf)";
  throw ValidationError(os.str());
}

double schatten_norm(const SpectralDecomposition& dec, Schatten p) {
  const Vector& l = dec.eigenvalues();
  switch (p) {
    case Schatten::kNuclear:
      return l.cwiseAbs().sum();
    case Schatten::kFrobenius:
      return std::sqrt(l.squaredNorm());
    case Schatten::kOperator:
      return dec.operator_norm();
  }
  throw ValidationError("schatten_norm: unknown norm");
}

double schatten_norm(const SymMatrix& a, Schatten p) {
  return schatten_norm(decompose(a), p);
}

double schatten_norm(const SymMatrix& a, double p) {
  return schatten_norm(a, schatten_from_p(p));
}

double weyl_deviation(const SpectralDecomposition& a, const SpectralDecomposition& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "weyl_deviation: dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw ValidationError(os.str());
  }
  return (a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff();
}

}  // namespace pcadb
