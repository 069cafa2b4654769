#pragma once

#include <stdexcept>
#include <string>

namespace omplab {

enum class ErrorCode {
  ZeroColumn,
  NotPowerOfTwo,
  MuTooLarge,
  ConditionViolated,
  TargetInfeasible,
  DimensionMismatch,
  EmptySupport,
  BadSparsity,
  IllConditioned,
  MipViolated,
  BetaInconsistent,
  Degenerate,
  BadParameter,
  IoError,
};

// Single exception type for all domain errors. `id` names the violated
// condition for ConditionViolated ("mip", "sparsity-bound",
// "coherence-interval", "tail-coherence"); `value` carries a numeric
// diagnostic such as a condition-number estimate.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string id = {},
        double value = 0.0)
      : std::runtime_error(message), code_(code), id_(std::move(id)), value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& id() const noexcept { return id_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::string id_;
  double value_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::string id = {}, double value = 0.0) {
  throw Error(code, message, std::move(id), value);
}

}  // namespace omplab
