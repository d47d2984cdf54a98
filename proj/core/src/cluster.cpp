#include "pcadb/cluster.hpp"

#include "pcadb/errors.hpp"

#include <cmath>
#include <sstream>

namespace pcadb {

DeltaClustering delta_clusters(std::span<const double> eigs, double delta) {
  if (eigs.empty()) throw ValidationError("delta_clusters: empty eigenvalue list");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ValidationError("delta_clusters: delta must be positive and finite");
  }
  for (std::size_t j = 0; j < eigs.size(); ++j) {
    if (!std::isfinite(eigs[j])) throw ValidationError("delta_clusters: non-finite eigenvalue");
    if (j > 0 && eigs[j] > eigs[j - 1]) {
      std::ostringstream os;
      os << "delta_clusters: eigenvalues not in non-increasing order at index " << j;
      throw ValidationError(os.str());
    }
  }

  DeltaClustering out;
  out.delta = delta;
  const int d = static_cast<int>(eigs.size());
  int first = 0;
  for (int j = 1; j <= d; ++j) {
    if (j == d || eigs[static_cast<std::size_t>(j - 1)] - eigs[static_cast<std::size_t>(j)] >= delta) {
      out.clusters.push_back(IndexRange{first, j - first});
      first = j;
    }
  }
  return out;
}

DeltaClustering delta_clusters(const Vector& eigs, double delta) {
  return delta_clusters(std::span<const double>(eigs.data(), static_cast<std::size_t>(eigs.size())),
                        delta);
}

namespace {

struct Located {
  IndexRange cluster;
  double delta;
};

Located locate_cluster(const SpectralDecomposition& dec, int r, double tau) {
  if (!(tau > 0.0 && tau < 2.0)) {
    std::ostringstream os;
    os << "empirical_projector: tau = " << tau << " outside (0, 2)";
    throw ValidationError(os.str());
  }
  if (r < 1) throw IndexError("empirical_projector: rank r must be >= 1");
  const double delta = tau * dec.eigenvalues()(0);
  if (!(delta > 0.0)) {
    throw ClusterNotFoundError("empirical_projector: top eigenvalue is not positive", 0, delta);
  }
  const DeltaClustering clustering = delta_clusters(dec.eigenvalues(), delta);
  if (r > clustering.nu()) {
    std::ostringstream os;
    os << "empirical_projector: rank " << r << " exceeds the " << clustering.nu()
       << " delta-clusters found at delta = " << delta;
    throw ClusterNotFoundError(os.str(), clustering.nu(), delta);
  }
  return {clustering.clusters[static_cast<std::size_t>(r - 1)], delta};
}

}  // namespace

ClusterProjector empirical_projector(const SpectralDecomposition& dec, int r, double tau) {
  const Located loc = locate_cluster(dec, r, tau);
  const auto block = dec.eigenvectors().middleCols(loc.cluster.first, loc.cluster.count);

  ClusterProjector out;
  out.r = r;
  out.delta = loc.delta;
  out.tau = tau;
  out.cluster = loc.cluster;
  out.projector = block * block.transpose();
  if (loc.cluster.count == 1) out.eigvec = Vector(block.col(0));
  return out;
}

ClusterVector empirical_eigenvector(const SpectralDecomposition& dec, int r, double tau) {
  const Located loc = locate_cluster(dec, r, tau);
  if (loc.cluster.count != 1) {
    std::ostringstream os;
    os << "delta-cluster " << r << " has " << loc.cluster.count
       << " eigenvalues; a linear functional needs a one-dimensional eigenspace";
    throw MultiplicityError(os.str(), loc.cluster.count);
  }
  return {Vector(dec.eigenvectors().col(loc.cluster.first)), loc.delta, loc.cluster};
}

Vector align(const Vector& v, const Vector& ref) {
  if (v.size() != ref.size()) throw ValidationError("align: dimension mismatch");
  if (ref.squaredNorm() == 0.0) throw ValidationError("align: zero reference vector");
  return v.dot(ref) >= 0.0 ? v : Vector(-v);
}

}  // namespace pcadb
