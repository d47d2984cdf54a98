#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pcadb {

// Root of every error thrown by the library. Callers that only need to tell
// "bad input" from "numerical trouble" can catch the intermediate classes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public DomainError {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : DomainError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// A functional of a spectral projector that needs a one-dimensional
// eigenspace was asked for a group of multiplicity > 1.
class MultiplicityError : public DomainError {
 public:
  MultiplicityError(const std::string& what, int multiplicity)
      : DomainError(what), multiplicity_(multiplicity) {}
  int multiplicity() const { return multiplicity_; }

 private:
  int multiplicity_;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::string diagnostics = {})
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

// Index matching of a perturbed spectrum against the reference groups is
// ambiguous (eigenvalue crossing or a tie across a group boundary).
class MatchingError : public Error {
 public:
  using Error::Error;
};

// The requested delta-cluster rank does not exist at the realized delta.
class ClusterNotFoundError : public Error {
 public:
  ClusterNotFoundError(const std::string& what, int cluster_count, double delta)
      : Error(what), cluster_count_(cluster_count), delta_(delta) {}
  int cluster_count() const { return cluster_count_; }
  double delta() const { return delta_; }

 private:
  int cluster_count_;
  double delta_;
};

// Estimation on one of the three subsamples failed; subsample is 1, 2 or 3.
class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, int subsample)
      : Error(what), subsample_(subsample) {}
  int subsample() const { return subsample_; }

 private:
  int subsample_;
};

class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, std::vector<std::string> failed)
      : Error(what), failed_(std::move(failed)) {}
  const std::vector<std::string>& failed_conditions() const { return failed_; }

 private:
  std::vector<std::string> failed_;
};

// A scenario could not be set up (model construction, functional, rank).
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// Every replicate of an aggregate failed.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcadb
