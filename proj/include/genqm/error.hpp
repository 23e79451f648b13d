#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genqm {

enum class ErrorCode {
  Syntax,
  UnknownIdentifier,
  NonIntegerExponent,
  Evaluation,
  InvalidGrid,
  InvalidConstants,
  ZeroAuxiliary,
  NonRealProfile,
  AsymmetricGrid,
  SizeMismatch,
  MissingConjugateField,
  DegenerateNorm,
  Unnormalized,
  OutOfRange,
  ConvergenceFailure,
  ProblemTooLarge,
  SolverBreakdown,
  GridMismatch,
  InvalidArgument,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base of every error raised by the library. The code is stable and is what
/// the CLI serializes into its error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t offset, const std::string& message)
      : Error(code, message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  EvalError(const std::string& what, double x);

  double x() const noexcept { return x_; }

 private:
  double x_;
};

}  // namespace genqm
