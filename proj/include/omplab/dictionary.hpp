#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "omplab/sparse_vector.hpp"

namespace omplab {

// Measurement matrix with unit-norm columns (the atoms). Immutable after
// construction; safe to share read-only across threads.
struct Dictionary {
  Eigen::MatrixXd atoms;  // n x N, column-major
  std::string label;

  int rows() const { return static_cast<int>(atoms.rows()); }
  int cols() const { return static_cast<int>(atoms.cols()); }
  void validate() const;  // unit columns within 1e-9, finite, n >= 1, N >= 2
};

// max_{i != j} |<a_i, a_j>| by exact pair scan (blocked Gram products).
double coherence(const Dictionary& d);
double coherence_of_columns(const Eigen::MatrixXd& m);

// Scales every column to unit norm; throws ZeroColumn below 1e-12.
Dictionary normalize_columns(Eigen::MatrixXd m, std::string label = "normalized");

// [I H] with H the Sylvester-Hadamard matrix scaled by 1/sqrt(n); n = 2^k.
Dictionary build_two_ortho(int n);

// Columns i.i.d. uniform on the unit sphere; deterministic given seed.
Dictionary build_random_sphere(int n, int cols, std::uint64_t seed);

// m unit vectors in R^m whose Gram has unit diagonal and constant
// off-diagonal -mu. Built from a Householder reflection sending e1 to
// (1/sqrt(m))*1 and the explicit row construction on top of it.
struct EquiangularBlock {
  Eigen::MatrixXd vectors;  // m x m, one block vector per column
  double mu = 0.0;
};
EquiangularBlock build_equiangular_block(int m, double mu);

// Coherence bounds for an a x b overcomplete frame, a < b:
// welch_lower = sqrt((b-a)/(a(b-1))), tropp_upper = 2 sqrt(ln(b)/a).
struct CoherenceBounds {
  double welch_lower = 0.0;
  double tropp_upper = 0.0;
  int sub_rows = 0;
  int sub_cols = 0;
};
CoherenceBounds coherence_bounds(int sub_rows, int sub_cols);

// Worst-case dictionary: an equiangular support block (padded with zeros)
// plus tail atoms sharing the common component sqrt(mu_tilde)*e_bar. The
// result has coherence exactly mu and comes with the equal-coefficient
// support template the construction is adversarial for.
//
// tail must be (n-m) x (N-m) with unit columns. tail_coherence_bound is the
// L of the precondition scan; pass <= 0 to use the measured tail coherence.
// Throws ConditionViolated with id "mip", "sparsity-bound",
// "coherence-interval" or "tail-coherence".
struct AdversarialInstance {
  Dictionary dict;
  SparseVector support_template;  // support {0..m-1}, unit coefficients
  double tail_coherence = 0.0;    // the L actually used
};
AdversarialInstance build_adversarial(int n, int cols, int m, double mu,
                                      const Dictionary& tail,
                                      double tail_coherence_bound = -1.0);

// Alternating projection between the clipped-Gram set (unit diagonal,
// off-diagonals <= mu_target in magnitude) and rank-<=n PSD matrices.
// Non-convergence is not fatal: the best iterate is returned with its
// achieved coherence and converged=false.
struct DesignResult {
  Dictionary dict;
  double achieved_coherence = 0.0;
  bool converged = false;
  int iterations = 0;
};
DesignResult design_incoherent(int n, int cols, double mu_target,
                               int max_iters = 5000, double tol = 1e-3,
                               std::uint64_t seed = 0);

// Binary file format: magic "OMPLAB01", little-endian u64 n, u64 N,
// n*N float64 entries column-major, then u64 label length + UTF-8 label.
void save_dictionary(const Dictionary& d, const std::string& path);
Dictionary load_dictionary(const std::string& path);

}  // namespace omplab
