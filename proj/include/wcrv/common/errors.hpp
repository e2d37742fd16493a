#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wcrv {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad inputs: malformed configs, inconsistent parameters, broken meshes.
/// CLI exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A solver failed to converge. Carries iteration diagnostics in the message.
/// CLI exit code 3.
class SolverError : public Error {
public:
  using Error::Error;
};

/// A produced object failed verification. CLI exit code 4.
class VerificationError : public Error {
public:
  using Error::Error;
};

/// Evaluation requested outside the domain of a formula (f <= 0, vanishing
/// omega, chart boundary, ...). Carries the offending node/point indices.
class DomainViolation : public Error {
public:
  DomainViolation(const std::string& what, std::vector<int> offending = {})
      : Error(what), offending_nodes(std::move(offending)) {}
  std::vector<int> offending_nodes;
};

/// A mesh triangle with area below the degeneracy threshold. Names the
/// triangle so the caller can locate it.
class DegenerateTriangleError : public ValidationError {
public:
  DegenerateTriangleError(int triangle, double area, const std::string& what)
      : ValidationError(what), triangle_index(triangle), triangle_area(area) {}
  int triangle_index;
  double triangle_area;
};

/// Violation of the sign constraints tying r, p and the base curvature
/// (negative r requires p > 2 and negative constant curvature).
class SignConstraintError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

} // namespace wcrv
