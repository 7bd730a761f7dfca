#include "evokit/error.hpp"

namespace evokit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EdgeSupport: return "EdgeSupport";
    case ErrorCode::WrapMargin: return "WrapMargin";
    case ErrorCode::SupportEscape: return "SupportEscape";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SpdViolation: return "SpdViolation";
    case ErrorCode::ProjectorInvalid: return "ProjectorInvalid";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::SizeExceeded: return "SizeExceeded";
    case ErrorCode::SingularFrequency: return "SingularFrequency";
    case ErrorCode::UnsupportedLaw: return "UnsupportedLaw";
    case ErrorCode::StepSingular: return "StepSingular";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LipschitzViolated: return "LipschitzViolated";
    case ErrorCode::SingularCoupling: return "SingularCoupling";
    case ErrorCode::ZeroCoefficient: return "ZeroCoefficient";
    case ErrorCode::NotCoercive: return "NotCoercive";
    case ErrorCode::TailTooShort: return "TailTooShort";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::ResolutionExceeded: return "ResolutionExceeded";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

bool is_validation(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch:
    case ErrorCode::SpdViolation:
    case ErrorCode::ProjectorInvalid:
    case ErrorCode::SizeExceeded:
    case ErrorCode::UnsupportedLaw:
    case ErrorCode::ZeroCoefficient:
    case ErrorCode::NoRoot:
    case ErrorCode::ResolutionExceeded:
    case ErrorCode::Validation:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace evokit
