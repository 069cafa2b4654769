#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "omplab/dictionary.hpp"
#include "omplab/sparse_vector.hpp"

namespace omplab {

struct SignalInstance {
  Eigen::VectorXd observation;
  double sigma = 0.0;
  std::optional<SparseVector> truth;
  std::uint64_t noise_seed = 0;
};

// observation = D x + sigma w, w a standard normal vector drawn
// deterministically from noise_seed.
SignalInstance synthesize(const Dictionary& d, const SparseVector& x,
                          double sigma, std::uint64_t noise_seed);

enum class SignMode { AllPositive, RandomSign };

// Support uniform over m-subsets of [0, N); coefficients +-magnitude.
// magnitude == 0 is allowed and produces the pure-noise control vector.
SparseVector random_support_vector(int length, int m, double magnitude,
                                   SignMode sign_mode, std::uint64_t seed);

}  // namespace omplab
