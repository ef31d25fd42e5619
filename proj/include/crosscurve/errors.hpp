#pragma once

#include <stdexcept>
#include <string>

namespace crosscurve {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionError : Error { using Error::Error; };
struct SegmentInvalidError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegeneracyError : Error { using Error::Error; };
struct ContinuationError : Error { using Error::Error; };
struct ConstructionError : Error { using Error::Error; };
struct OptimalityError : Error { using Error::Error; };
struct InfeasibleError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct ParametrizationError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };

}  // namespace crosscurve
