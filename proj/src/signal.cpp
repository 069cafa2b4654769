#include "omplab/signal.hpp"

#include <algorithm>
#include <numeric>

#include "omplab/errors.hpp"
#include "omplab/rng.hpp"

namespace omplab {

SignalInstance synthesize(const Dictionary& d, const SparseVector& x,
                          double sigma, std::uint64_t noise_seed) {
  if (x.length != d.cols())
    fail(ErrorCode::DimensionMismatch,
         "vector length " + std::to_string(x.length) + " vs " +
             std::to_string(d.cols()) + " atoms");
  if (sigma < 0.0) fail(ErrorCode::BadParameter, "sigma must be >= 0");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.rows());
  for (std::size_t k = 0; k < x.support.size(); ++k)
    y += x.values[k] * d.atoms.col(x.support[k]);
  if (sigma > 0.0) {
    Rng rng(noise_seed);
    for (int i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
  }
  return SignalInstance{std::move(y), sigma, x, noise_seed};
}

SparseVector random_support_vector(int length, int m, double magnitude,
                                   SignMode sign_mode, std::uint64_t seed) {
  if (m < 1 || m > length)
    fail(ErrorCode::BadSparsity,
         "need 1 <= m <= N, got m=" + std::to_string(m) + " N=" + std::to_string(length));
  if (magnitude < 0.0) fail(ErrorCode::BadParameter, "negative magnitude");

  Rng rng(seed);
  // partial Fisher-Yates: uniform over m-subsets
  std::vector<int> pool(length);
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < m; ++k) {
    int j = k + rng.uniform_int(length - k);
    std::swap(pool[k], pool[j]);
  }
  SparseVector x;
  x.length = length;
  x.support.assign(pool.begin(), pool.begin() + m);
  std::sort(x.support.begin(), x.support.end());
  x.values.resize(m, magnitude);
  if (sign_mode == SignMode::RandomSign) {
    for (int k = 0; k < m; ++k)
      if (rng.next_u64() & 1u) x.values[k] = -x.values[k];
  }
  return x;
}

}  // namespace omplab
