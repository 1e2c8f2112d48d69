#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confein {

enum class ErrorCode {
  Syntax,
  UnknownIdentifier,
  Domain,
  SingularMetric,
  NonPositiveConformalFactor,
  EmptyDomain,
  UnsupportedDim,
  UnknownScenario,
  BadParameter,
  ConstantSummand,
  IllConditionedFit,
  FitFailure,
  Precondition,
  Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure. position is a 0-based byte offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error(ErrorCode::Syntax,
              message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t position)
      : Error(ErrorCode::UnknownIdentifier,
              "unknown identifier '" + name + "' at position " +
                  std::to_string(position)),
        name_(name),
        position_(position) {}

  const std::string& name() const noexcept { return name_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string name_;
  std::size_t position_;
};

// Evaluation left the domain of an operation. node holds the printed
// subexpression that failed.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, const std::string& node)
      : Error(ErrorCode::Domain, what + " in '" + node + "'"), node_(node) {}

  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

}  // namespace confein
