#pragma once

// Gaussian covariance models, reproducible sampling X_i ~ N(0, Sigma) and the
// (uncentered) sample covariance.

#include "pcadb/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pcadb {

struct ModelMeta {
  std::string family;  // "matrix", "diagonal", "prop32", "spiked"
  int r = 0;
  double a = 0.0;
  int tail_dim = 0;
  double mu1 = 0.0;
  std::vector<double> spikes;
  double noise = 0.0;
  std::optional<double> closed_form_effective_rank;
};

class CovarianceModel {
 public:
  const SymMatrix& sigma() const { return sigma_; }
  const Matrix& sqrt() const { return sqrt_; }
  const SpectralDecomposition& dec() const { return dec_; }
  const ModelMeta& meta() const { return meta_; }
  int dim() const { return sigma_.dim(); }
  bool is_diagonal() const { return diagonal_; }

 private:
  friend CovarianceModel make_model(const SymMatrix& s);
  friend CovarianceModel make_model(const SymMatrix& s, ModelMeta meta);

  SymMatrix sigma_;
  Matrix sqrt_;
  SpectralDecomposition dec_;
  ModelMeta meta_;
  bool diagonal_ = false;
};

// Caches Sigma^{1/2} from the eigendecomposition; eigenvalues in
// [-1e-10 ||S||, 0) are clamped to zero, anything below is NotPsdError.
CovarianceModel make_model(const SymMatrix& s);
CovarianceModel make_model(const SymMatrix& s, ModelMeta meta);

// Sigma_0 = sum_{s<=r+1} mu_s P_s with mu_s = mu1 (1 - (s-1)/a); P_1..P_r are
// rank one on e_1..e_r and P_{r+1} covers the next `tail_dim` coordinates.
CovarianceModel prop32_model(int r, double a, int tail_dim, double mu1);

// diag(s_1 + noise, ..., s_l + noise, noise, ..., noise) of size d.
CovarianceModel spiked_model(const std::vector<double>& spikes, double noise, int d);

CovarianceModel diagonal_model(const std::vector<double>& values);

// Closed-form effective rank of the prop32 family.
double prop32_effective_rank(int r, double a, int tail_dim);

// Serializable model descriptions (config files, scenarios).
struct MatrixSpec {
  std::vector<std::vector<double>> rows;
  bool operator==(const MatrixSpec&) const = default;
};
struct DiagonalSpec {
  std::vector<double> values;
  bool operator==(const DiagonalSpec&) const = default;
};
struct Prop32Spec {
  int r = 1;
  double a = 2.0;
  int d = 1;
  double mu1 = 1.0;
  bool operator==(const Prop32Spec&) const = default;
};
struct SpikedSpec {
  std::vector<double> spikes;
  double noise = 1.0;
  int d = 1;
  bool operator==(const SpikedSpec&) const = default;
};
using ModelSpec = std::variant<MatrixSpec, DiagonalSpec, Prop32Spec, SpikedSpec>;

CovarianceModel make_model(const ModelSpec& spec);
std::string family_name(const ModelSpec& spec);

struct SampleSet {
  int n = 0;
  int dim = 0;
  Matrix data;  // n x d, one observation per row
  std::uint64_t seed = 0;
};

// X_i = Sigma^{1/2} Z_i; row i draws its standard normals from a
// CounterRng keyed by seed_derive(seed, i), so any row range can be
// regenerated independently.
SampleSet draw(const CovarianceModel& model, int n, std::uint64_t seed);

// Wraps observed data (rows = observations) as a SampleSet.
SampleSet sample_set_from_rows(Matrix rows);

// Haar-distributed d x d orthogonal matrix (QR of a Gaussian matrix with the
// sign of R's diagonal folded into Q), reproducible from `seed`.
Matrix random_orthogonal(int d, std::uint64_t seed);

// n^{-1} sum_j X_j X_j^T, no centering.
SymMatrix sample_covariance(const SampleSet& samples);
SymMatrix sample_covariance(const Eigen::Ref<const Matrix>& rows);

}  // namespace pcadb
