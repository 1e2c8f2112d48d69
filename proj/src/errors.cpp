#include "confein/errors.hpp"

namespace confein {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::NonPositiveConformalFactor: return "NonPositiveConformalFactor";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::UnsupportedDim: return "UnsupportedDim";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::ConstantSummand: return "ConstantSummand";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::Precondition: return "PreconditionViolated";
    case ErrorCode::Config: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace confein
