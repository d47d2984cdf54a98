#pragma once

// Dense symmetric spectral machinery: eigendecomposition with multiplicity
// grouping, effective rank, spectral gaps, the reduced resolvent C_r and
// Schatten norms.
//
// Group ranks (the r of mu_r, P_r, C_r) are 1-based throughout the public
// API; eigenvalue indices inside a decomposition are 0-based.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pcadb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kDefaultGroupTolerance = 1e-9;

// A real symmetric matrix. Construction from an arbitrary matrix validates
// |A_ij - A_ji| <= tol; results of internal arithmetic that are symmetric
// only up to rounding go through symmetrized().
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m, double tol = kSymmetryTolerance);

  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix zero(int dim);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(std::span<const double> values);
  static SymMatrix diagonal(const Vector& values);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double c) const;
  friend SymMatrix operator*(double c, const SymMatrix& s) { return s * c; }

 private:
  struct Unchecked {};
  SymMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

// One distinct eigenvalue mu_r with its index set Delta_r, stored as the
// contiguous block [first, first + multiplicity) of the descending spectrum.
struct DistinctEigenvalue {
  double value = 0.0;
  int first = 0;
  int multiplicity = 0;

  int last() const { return first + multiplicity - 1; }
  bool contains(int index) const { return index >= first && index <= last(); }
};

class SpectralDecomposition {
 public:
  SpectralDecomposition() = default;
  SpectralDecomposition(Vector eigenvalues, Matrix eigenvectors,
                        std::vector<DistinctEigenvalue> groups);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  // lambda_1 >= ... >= lambda_d
  const Vector& eigenvalues() const { return eigenvalues_; }
  // Column j is the unit eigenvector of lambda_{j+1}.
  const Matrix& eigenvectors() const { return eigenvectors_; }
  const std::vector<DistinctEigenvalue>& groups() const { return groups_; }
  int group_count() const { return static_cast<int>(groups_.size()); }

  const DistinctEigenvalue& group(int r) const;
  // 1-based rank of the group holding eigenvalue index `index`.
  int group_of_index(int index) const;

  // P_r as a dense d x d matrix; O(d^2 m_r), computed on demand.
  Matrix projector(int r) const;
  // Orthonormal basis of Im(P_r), d x m_r.
  Matrix basis(int r) const;
  // theta_r; throws MultiplicityError unless m_r == 1.
  Vector eigenvector(int r) const;

  // Sum_s mu_s P_s.
  Matrix reconstruct() const;
  double operator_norm() const;
  double trace() const;
  double min_eigenvalue() const;

  // Value of the group containing each eigenvalue index, i.e. the spectrum
  // with grouped eigenvalues snapped to their mu_s.
  Vector grouped_eigenvalues() const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  std::vector<DistinctEigenvalue> groups_;
};

// Eigendecomposition of `s`. Eigenvalues closer than group_tol * (1 + ||s||)
// to their neighbour are merged into one group. Every eigenvector column is
// signed so that its largest-magnitude entry is positive.
SpectralDecomposition decompose(const SymMatrix& s,
                                double group_tol = kDefaultGroupTolerance);

// r(S) = tr(S) / ||S||.
double effective_rank(const SymMatrix& s);
double effective_rank(const SpectralDecomposition& dec);

struct SpectralGaps {
  double gap = 0.0;      // g_r
  double min_gap = 0.0;  // min_{s <= r} g_s
};

// With a single distinct eigenvalue, g_1 = mu_1 (distance to 0).
SpectralGaps spectral_gaps(const SpectralDecomposition& dec, int r);

// C_r = sum_{s != r} P_s / (mu_r - mu_s).
SymMatrix reduced_resolvent(const SpectralDecomposition& dec, int r);
// C_r v without forming C_r.
Vector apply_reduced_resolvent(const SpectralDecomposition& dec, int r,
                               const Vector& v);
// S^{1/2} v and S^{-1/2} v through the decomposition. The inverse root
// throws DomainError when an eigenvalue is not strictly positive.
Vector apply_sqrt(const SpectralDecomposition& dec, const Vector& v);
Vector apply_inverse_sqrt(const SpectralDecomposition& dec, const Vector& v);

enum class Schatten { kNuclear, kFrobenius, kOperator };

// p must be 1, 2 or +infinity; anything else is a ValidationError.
Schatten schatten_from_p(double p);
double schatten_norm(const SpectralDecomposition& dec, Schatten p);
double schatten_norm(const SymMatrix& a, Schatten p);
double schatten_norm(const SymMatrix& a, double p);

// sup_j |lambda_j(A) - lambda_j(B)| over the descending spectra.
double weyl_deviation(const SpectralDecomposition& a,
                      const SpectralDecomposition& b);

}  // namespace pcadb
