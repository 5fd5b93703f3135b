#pragma once

#include <stdexcept>
#include <string>

namespace fishlen {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TotalInternalReflection : public Error {
 public:
  TotalInternalReflection() : Error("total internal reflection") {}
};

class RayParallelToPort : public Error {
 public:
  RayParallelToPort() : Error("viewing ray does not reach the port plane") {}
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double residual)
      : Error("forward projection did not converge after " +
              std::to_string(iterations) + " iterations (residual " +
              std::to_string(residual) + " mm)"),
        iterations(iterations),
        residual(residual) {}
  int iterations;
  double residual;
};

class PointBehindPort : public Error {
 public:
  explicit PointBehindPort(const std::string& what) : Error(what) {}
};

class NearParallelRays : public Error {
 public:
  NearParallelRays() : Error("triangulation rays are parallel") {}
};

class DegenerateBody : public Error {
 public:
  DegenerateBody() : Error("mouth and caudal fin coincide") {}
};

/// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& field, const std::string& what)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string()) +
              (field.empty() ? "" : "field '" + field + "': ") + what),
        line(line),
        field(field) {}
  std::size_t line;
  std::string field;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& subject, const std::string& invariant)
      : Error(subject + ": " + invariant), subject(subject), invariant(invariant) {}
  std::string subject;
  std::string invariant;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluation : public Error {
 public:
  EmptyEvaluation() : Error("no prediction could be associated with ground truth") {}
};

class TemplateOutOfBounds : public Error {
 public:
  TemplateOutOfBounds() : Error("template window exceeds the image") {}
};

class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error("both patches are constant") {}
};

class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fishlen
