#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aggsplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptySet,
  EmptyLocalSet,
  Infeasible,
  NonSmoothCost,
  InvalidStepSizes,
  NoConvergence,
  MaxItersExceeded,
  NotCertified,
  GenerationFailed,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require_size(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected)
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": expected length " + std::to_string(expected) +
             ", got " + std::to_string(v.size()));
}

}  // namespace aggsplit
