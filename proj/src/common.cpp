#include "aggsplit/common.hpp"

namespace aggsplit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyLocalSet: return "EmptyLocalSet";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NonSmoothCost: return "NonSmoothCost";
    case ErrorCode::InvalidStepSizes: return "InvalidStepSizes";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace aggsplit
