#pragma once

// Standard normal distribution helpers.

namespace pcadb {

// Phi(x) = erfc(-x / sqrt 2) / 2.
double normal_cdf(double x);

// Phi^{-1}(p) for p in (0, 1); anything else is a ValidationError.
double normal_quantile(double p);

}  // namespace pcadb
