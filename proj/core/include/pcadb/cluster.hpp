#pragma once

// delta-clusters of a spectrum and the empirical spectral projector built
// from them with a data-driven delta = tau * ||Sigma_hat||.

#include "pcadb/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pcadb {

inline constexpr double kDefaultTau = 0.1;

// Contiguous block [first, first + count) of a descending eigenvalue list.
struct IndexRange {
  int first = 0;
  int count = 0;

  int last() const { return first + count - 1; }
  bool operator==(const IndexRange&) const = default;
};

struct DeltaClustering {
  double delta = 0.0;
  std::vector<IndexRange> clusters;

  int nu() const { return static_cast<int>(clusters.size()); }
};

// Repeatedly peels off the top delta-cluster: a cluster boundary falls
// wherever two consecutive eigenvalues are at least delta apart.
DeltaClustering delta_clusters(std::span<const double> eigs, double delta);
DeltaClustering delta_clusters(const Vector& eigs, double delta);

struct ClusterProjector {
  int r = 0;
  double delta = 0.0;
  double tau = 0.0;
  Matrix projector;
  IndexRange cluster;
  // Present only for singleton clusters; sign follows the decomposition's
  // largest-entry-positive rule.
  std::optional<Vector> eigvec;
};

// Projector onto the eigenvectors of the r-th delta-cluster of the spectrum
// in `dec`, with delta = tau * lambda_1. Throws ClusterNotFoundError carrying
// nu and delta when fewer than r clusters exist.
ClusterProjector empirical_projector(const SpectralDecomposition& dec, int r, double tau);

// Same cluster search without forming the d x d projector.
struct ClusterVector {
  Vector eigvec;
  double delta = 0.0;
  IndexRange cluster;
};
ClusterVector empirical_eigenvector(const SpectralDecomposition& dec, int r, double tau);

// v if <v, ref> >= 0, otherwise -v.
Vector align(const Vector& v, const Vector& ref);

}  // namespace pcadb
