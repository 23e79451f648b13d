#include "genqm/error.hpp"

#include <cstdio>

namespace genqm {

namespace {

std::string format_x(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::UnknownIdentifier: return "unknown_identifier";
    case ErrorCode::NonIntegerExponent: return "non_integer_exponent";
    case ErrorCode::Evaluation: return "evaluation";
    case ErrorCode::InvalidGrid: return "invalid_grid";
    case ErrorCode::InvalidConstants: return "invalid_constants";
    case ErrorCode::ZeroAuxiliary: return "zero_auxiliary";
    case ErrorCode::NonRealProfile: return "non_real_profile";
    case ErrorCode::AsymmetricGrid: return "asymmetric_grid";
    case ErrorCode::SizeMismatch: return "size_mismatch";
    case ErrorCode::MissingConjugateField: return "missing_conjugate_field";
    case ErrorCode::DegenerateNorm: return "degenerate_norm";
    case ErrorCode::Unnormalized: return "unnormalized";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::ConvergenceFailure: return "convergence_failure";
    case ErrorCode::ProblemTooLarge: return "problem_too_large";
    case ErrorCode::SolverBreakdown: return "solver_breakdown";
    case ErrorCode::GridMismatch: return "grid_mismatch";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

EvalError::EvalError(const std::string& what, double x)
    : Error(ErrorCode::Evaluation, what + " at x = " + format_x(x)), x_(x) {}

}  // namespace genqm
