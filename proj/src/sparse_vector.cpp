#include "omplab/sparse_vector.hpp"

#include <cmath>
#include <sstream>

#include "omplab/errors.hpp"

namespace omplab {

void SparseVector::validate() const {
  if (length < 0) fail(ErrorCode::BadParameter, "negative vector length");
  if (support.size() != values.size())
    fail(ErrorCode::BadParameter, "support/value size mismatch");
  int prev = -1;
  for (std::size_t k = 0; k < support.size(); ++k) {
    int idx = support[k];
    if (idx <= prev)
      fail(ErrorCode::BadParameter, "support indices must be strictly increasing");
    if (idx < 0 || idx >= length)
      fail(ErrorCode::BadParameter, "support index out of range");
    if (values[k] == 0.0)
      fail(ErrorCode::BadParameter, "zero coefficient on the support");
    if (!std::isfinite(values[k]))
      fail(ErrorCode::BadParameter, "non-finite coefficient");
    prev = idx;
  }
}

Eigen::VectorXd SparseVector::dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
  for (std::size_t k = 0; k < support.size(); ++k) out[support[k]] = values[k];
  return out;
}

double x_min(const SparseVector& x) {
  if (x.support.empty()) fail(ErrorCode::EmptySupport, "x_min of an empty support");
  double best = std::abs(x.values[0]);
  for (double v : x.values) best = std::min(best, std::abs(v));
  return best;
}

std::string to_text(const SparseVector& x) {
  std::ostringstream out;
  out << "# N=" << x.length << " m=" << x.sparsity() << "\n";
  out.precision(17);
  for (std::size_t k = 0; k < x.support.size(); ++k)
    out << x.support[k] << " " << x.values[k] << "\n";
  return out.str();
}

SparseVector sparse_vector_from_text(std::istream& in) {
  SparseVector x;
  std::string line;
  bool have_header = false;
  int declared_m = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      int n = 0, m = 0;
      if (std::sscanf(line.c_str(), "# N=%d m=%d", &n, &m) == 2) {
        x.length = n;
        declared_m = m;
        have_header = true;
      }
      continue;
    }
    std::istringstream row(line);
    int idx;
    double value;
    if (!(row >> idx >> value))
      fail(ErrorCode::IoError, "malformed sparse-vector line: " + line);
    x.support.push_back(idx);
    x.values.push_back(value);
  }
  if (!have_header) fail(ErrorCode::IoError, "missing '# N=<N> m=<m>' header");
  if (declared_m != x.sparsity())
    fail(ErrorCode::IoError, "header sparsity does not match entry count");
  x.validate();
  return x;
}

SparseVector sparse_vector_from_text(const std::string& text) {
  std::istringstream in(text);
  return sparse_vector_from_text(in);
}

}  // namespace omplab
