#pragma once

#include <stdexcept>
#include <string>

namespace evokit {

enum class ErrorCode {
  EdgeSupport,
  WrapMargin,
  SupportEscape,
  Divergence,
  ShapeMismatch,
  SpdViolation,
  ProjectorInvalid,
  DegenerateBasis,
  SizeExceeded,
  SingularFrequency,
  UnsupportedLaw,
  StepSingular,
  NoConvergence,
  LipschitzViolated,
  SingularCoupling,
  ZeroCoefficient,
  NotCoercive,
  TailTooShort,
  NoRoot,
  ResolutionExceeded,
  Validation,
};

const char* to_string(ErrorCode code);

// Validation errors are caller mistakes; everything else is a numerical failure.
bool is_validation(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace evokit
