#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "omplab/dictionary.hpp"
#include "omplab/sparse_vector.hpp"

namespace omplab {

enum class StopReason { IterationsExhausted, ThresholdReached, ResidualZero };

const char* to_string(StopReason r);

// Per-iteration record of a greedy solve.
//
// selected[t] is the atom added at iteration t+1; peak_correlation[t] is the
// winning max_i |<a_i, r_t>| before that selection; residual_norm[t] is
// ||r_{t+1}|| after re-projection. orthogonality_defect is the largest
// |<a_j, r_t>| / ||y|| seen over already-selected atoms j across all
// iterations (exactly 0 in exact arithmetic).
struct SolveTrace {
  std::vector<int> selected;
  std::vector<double> peak_correlation;
  std::vector<double> residual_norm;
  SparseVector estimate;
  StopReason stop_reason = StopReason::IterationsExhausted;
  double orthogonality_defect = 0.0;
};

struct LeastSquaresResult {
  Eigen::VectorXd coefficients;  // aligned with the input index order
  Eigen::VectorXd residual;
  double condition_estimate = 0.0;
};

// Least squares restricted to the atoms indexed by `support`, solved by an
// incrementally updated orthogonal factorization. The contract is the
// postcondition: <a_j, residual> = 0 for every j in support, within
// 1e-8 * ||y||. Throws IllConditioned when the restricted block's condition
// estimate exceeds 1e12.
LeastSquaresResult restricted_least_squares(const Dictionary& d,
                                            const Eigen::VectorXd& y,
                                            std::span<const int> support);

// Greedy pursuit with known sparsity: exactly `sparsity` iterations unless
// the residual norm falls below 1e-12 * ||y||. Argmax ties break to the
// lowest index.
SolveTrace omp(const Dictionary& d, const Eigen::VectorXd& y, int sparsity);

// Threshold-stopping variant: before each selection (including the first)
// stops with ThresholdReached when max_i |<a_i, r>| <= tau.
SolveTrace omp_star(const Dictionary& d, const Eigen::VectorXd& y, double tau,
                    int max_iters);

// True iff the selected index set equals the true support exactly.
bool support_recovered(const SolveTrace& trace, const SparseVector& truth);
bool support_recovered(const SolveTrace& trace, std::span<const int> truth_support);

// Diagnostic dump: columns iter,selected_index,peak_correlation,residual_norm.
std::string trace_to_csv(const SolveTrace& trace);

}  // namespace omplab
