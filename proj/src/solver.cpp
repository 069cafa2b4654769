#include "omplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "omplab/errors.hpp"

namespace omplab {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kResidualZeroScale = 1e-12;

// D_S = Q R maintained one column at a time (modified Gram-Schmidt with one
// reorthogonalization pass). The orthogonality postcondition, not this
// mechanism, is the contract.
class IncrementalQr {
 public:
  IncrementalQr(int n, int capacity, const Eigen::VectorXd& y)
      : q_(n, capacity), r_(Eigen::MatrixXd::Zero(capacity, capacity)),
        qty_(capacity), y_(y) {}

  int size() const { return size_; }

  // false when the column is numerically dependent on the current span
  bool add_column(const Eigen::VectorXd& a) {
    const int t = size_;
    Eigen::VectorXd z = a;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
    if (t > 0) {
      w = q_.leftCols(t).transpose() * a;
      z.noalias() -= q_.leftCols(t) * w;
      Eigen::VectorXd w2 = q_.leftCols(t).transpose() * z;
      z.noalias() -= q_.leftCols(t) * w2;
      w += w2;
    }
    double diag = z.norm();
    if (diag <= 1e-13 * std::max(1.0, a.norm())) return false;
    q_.col(t) = z / diag;
    r_.col(t).head(t) = w;
    r_(t, t) = diag;
    qty_[t] = q_.col(t).dot(y_);
    rdiag_max_ = std::max(rdiag_max_, diag);
    rdiag_min_ = std::min(rdiag_min_, diag);
    ++size_;
    return true;
  }

  Eigen::VectorXd residual() const {
    if (size_ == 0) return y_;
    return y_ - q_.leftCols(size_) * qty_.head(size_);
  }

  // back-substitution on R x = Q^T y
  Eigen::VectorXd coefficients() const {
    Eigen::VectorXd x = qty_.head(size_);
    for (int i = size_ - 1; i >= 0; --i) {
      for (int j = i + 1; j < size_; ++j) x[i] -= r_(i, j) * x[j];
      x[i] /= r_(i, i);
    }
    return x;
  }

  double condition_estimate() const {
    if (size_ == 0) return 1.0;
    return rdiag_max_ / rdiag_min_;
  }

 private:
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd qty_;
  Eigen::VectorXd y_;
  int size_ = 0;
  double rdiag_max_ = 0.0;
  double rdiag_min_ = std::numeric_limits<double>::infinity();
};

// argmax of |c_i|, ties to the lowest index
int peak_index(const Eigen::VectorXd& c) {
  int best = 0;
  double best_abs = std::abs(c[0]);
  for (int i = 1; i < c.size(); ++i) {
    double a = std::abs(c[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

SparseVector estimate_from(const std::vector<int>& selected,
                           const Eigen::VectorXd& coeffs, int length) {
  std::vector<std::pair<int, double>> entries;
  entries.reserve(selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k)
    if (coeffs[static_cast<int>(k)] != 0.0)
      entries.emplace_back(selected[k], coeffs[static_cast<int>(k)]);
  std::sort(entries.begin(), entries.end());
  SparseVector x;
  x.length = length;
  for (auto& [idx, v] : entries) {
    x.support.push_back(idx);
    x.values.push_back(v);
  }
  return x;
}

// Shared greedy loop. threshold < 0 disables the pre-selection stop (plain
// pursuit with a fixed iteration count).
SolveTrace greedy_pursuit(const Dictionary& d, const Eigen::VectorXd& y,
                          int max_iters, double threshold) {
  if (y.size() != d.rows())
    fail(ErrorCode::DimensionMismatch, "signal length does not match dictionary rows");

  SolveTrace trace;
  trace.estimate.length = d.cols();
  const double ynorm = y.norm();
  if (ynorm <= 0.0) {
    trace.stop_reason = StopReason::ResidualZero;
    return trace;
  }

  IncrementalQr qr(d.rows(), max_iters, y);
  Eigen::VectorXd r = y;
  trace.stop_reason = StopReason::IterationsExhausted;

  for (int t = 0; t < max_iters; ++t) {
    Eigen::VectorXd c = d.atoms.transpose() * r;
    for (int j : trace.selected)
      trace.orthogonality_defect =
          std::max(trace.orthogonality_defect, std::abs(c[j]) / ynorm);
    int j = peak_index(c);
    double peak = std::abs(c[j]);
    if (threshold >= 0.0 && peak <= threshold) {
      trace.stop_reason = StopReason::ThresholdReached;
      break;
    }
    if (peak == 0.0) {
      // residual orthogonal to every atom; no selectable direction left
      trace.stop_reason = StopReason::ResidualZero;
      break;
    }
    if (!qr.add_column(d.atoms.col(j)) ||
        qr.condition_estimate() > kConditionLimit)
      fail(ErrorCode::IllConditioned,
           "selected atoms are numerically dependent (condition estimate " +
               std::to_string(qr.condition_estimate()) + ")",
           {}, qr.condition_estimate());
    trace.selected.push_back(j);
    trace.peak_correlation.push_back(peak);
    r = qr.residual();
    trace.residual_norm.push_back(r.norm());
    if (r.norm() <= kResidualZeroScale * ynorm) {
      trace.stop_reason = StopReason::ResidualZero;
      break;
    }
  }

  if (!trace.selected.empty()) {
    // fold the final residual's correlations into the defect
    Eigen::VectorXd c = d.atoms.transpose() * r;
    for (int j : trace.selected)
      trace.orthogonality_defect =
          std::max(trace.orthogonality_defect, std::abs(c[j]) / ynorm);
    trace.estimate = estimate_from(trace.selected, qr.coefficients(), d.cols());
  }
  return trace;
}

}  // namespace

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::IterationsExhausted: return "iterations-exhausted";
    case StopReason::ThresholdReached: return "threshold-reached";
    case StopReason::ResidualZero: return "residual-zero";
  }
  return "?";
}

LeastSquaresResult restricted_least_squares(const Dictionary& d,
                                            const Eigen::VectorXd& y,
                                            std::span<const int> support) {
  if (y.size() != d.rows())
    fail(ErrorCode::DimensionMismatch, "signal length does not match dictionary rows");
  for (int j : support)
    if (j < 0 || j >= d.cols())
      fail(ErrorCode::BadParameter, "support index out of range");

  IncrementalQr qr(d.rows(), static_cast<int>(support.size()), y);
  for (int j : support) {
    if (!qr.add_column(d.atoms.col(j)) ||
        qr.condition_estimate() > kConditionLimit)
      fail(ErrorCode::IllConditioned,
           "restricted block is ill conditioned (condition estimate " +
               std::to_string(qr.condition_estimate()) + ")",
           {}, qr.condition_estimate());
  }
  LeastSquaresResult out;
  out.coefficients = qr.coefficients();
  out.residual = qr.residual();
  out.condition_estimate = qr.condition_estimate();
  return out;
}

SolveTrace omp(const Dictionary& d, const Eigen::VectorXd& y, int sparsity) {
  if (sparsity < 1 || sparsity > std::min(d.rows(), d.cols()))
    fail(ErrorCode::BadSparsity, "need 1 <= m <= min(n, N), got " +
                                     std::to_string(sparsity));
  return greedy_pursuit(d, y, sparsity, -1.0);
}

SolveTrace omp_star(const Dictionary& d, const Eigen::VectorXd& y, double tau,
                    int max_iters) {
  if (tau < 0.0) fail(ErrorCode::BadParameter, "threshold must be >= 0");
  if (max_iters < 0 || max_iters > std::min(d.rows(), d.cols()))
    fail(ErrorCode::BadSparsity, "need 0 <= max_iters <= min(n, N)");
  return greedy_pursuit(d, y, max_iters, tau);
}

bool support_recovered(const SolveTrace& trace, std::span<const int> truth_support) {
  if (trace.selected.size() != truth_support.size()) return false;
  std::vector<int> got(trace.selected);
  std::sort(got.begin(), got.end());
  return std::equal(got.begin(), got.end(), truth_support.begin());
}

bool support_recovered(const SolveTrace& trace, const SparseVector& truth) {
  return support_recovered(trace, std::span<const int>(truth.support));
}

std::string trace_to_csv(const SolveTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,selected_index,peak_correlation,residual_norm\n";
  for (std::size_t t = 0; t < trace.selected.size(); ++t)
    out << (t + 1) << "," << trace.selected[t] << "," << trace.peak_correlation[t]
        << "," << trace.residual_norm[t] << "\n";
  return out.str();
}

}  // namespace omplab
