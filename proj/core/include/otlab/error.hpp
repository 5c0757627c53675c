#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace otlab {

/// Failure categories raised by the library. Each maps to a named error of
/// the module contracts so callers can dispatch without string matching.
enum class ErrorKind {
  CutLocus,
  NonOrthonormalPlane,
  Unsupported,
  UnsupportedChart,
  ResolutionTooCoarse,
  DegenerateStencil,
  IndexOutOfRange,
  LengthMismatch,
  UnboundedDomain,
  NonPositiveField,
  SizeCap,
  NoConvergence,
  CertificationFailed,
  NonSymmetricHessian,
  SingularP,
  DenominatorVanishes,
  NormalizationDrift,
  ArgOutOfDomain,
  EmptyDomain,
  HypothesisViolation,
  ConfigError,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace otlab
