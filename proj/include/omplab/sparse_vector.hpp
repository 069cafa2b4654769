#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace omplab {

// Sparse coefficient vector: strictly increasing support indices with one
// value per index. A zero-magnitude vector (all values 0) is tolerated as a
// harness control point; validate() enforces the strict no-zero invariant.
struct SparseVector {
  int length = 0;
  std::vector<int> support;
  std::vector<double> values;

  int sparsity() const { return static_cast<int>(support.size()); }
  void validate() const;
  Eigen::VectorXd dense() const;
};

// min over the support of |value|; throws EmptySupport.
double x_min(const SparseVector& x);

// Text format: header "# N=<N> m=<m>", then one "index value" line per entry.
std::string to_text(const SparseVector& x);
SparseVector sparse_vector_from_text(std::istream& in);
SparseVector sparse_vector_from_text(const std::string& text);

}  // namespace omplab
