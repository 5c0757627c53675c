#include "otlab/error.hpp"

namespace otlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::CutLocus: return "CutLocus";
    case ErrorKind::NonOrthonormalPlane: return "NonOrthonormalPlane";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::UnsupportedChart: return "UnsupportedChart";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::DegenerateStencil: return "DegenerateStencil";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnboundedDomain: return "UnboundedDomain";
    case ErrorKind::NonPositiveField: return "NonPositiveField";
    case ErrorKind::SizeCap: return "SizeCap";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CertificationFailed: return "CertificationFailed";
    case ErrorKind::NonSymmetricHessian: return "NonSymmetricHessian";
    case ErrorKind::SingularP: return "SingularP";
    case ErrorKind::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorKind::NormalizationDrift: return "NormalizationDrift";
    case ErrorKind::ArgOutOfDomain: return "ArgOutOfDomain";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace otlab
