#pragma once

#include <stdexcept>
#include <string>

namespace gda {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  domain,       // argument outside the function's domain (non-finite input, x < 0, ...)
  parameter,    // invalid preference / solver parameter
  model,        // invalid market model (singular sigma, bad breakpoints)
  bracket,      // root not bracketed
  convergence,  // iteration cap reached
  step_size,    // Picard window could not be made contractive
  evaluation,   // integrand produced a non-finite value
  numeric,      // denominator underflow and similar
  boundary,     // quantity not defined at the boundary (delta == 1, v == 0)
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GDA_DEFINE_ERROR(Name, Kind)                                        \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  }

GDA_DEFINE_ERROR(DomainError, domain);
GDA_DEFINE_ERROR(ParameterError, parameter);
GDA_DEFINE_ERROR(ModelError, model);
GDA_DEFINE_ERROR(BracketError, bracket);
GDA_DEFINE_ERROR(ConvergenceError, convergence);
GDA_DEFINE_ERROR(StepSizeError, step_size);
GDA_DEFINE_ERROR(NumericError, numeric);
GDA_DEFINE_ERROR(BoundaryError, boundary);
GDA_DEFINE_ERROR(IoError, io);

#undef GDA_DEFINE_ERROR

/// Raised when an integrand is non-finite; carries the offending abscissa.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double node)
      : Error(ErrorKind::evaluation, what), node_(node) {}
  double node() const noexcept { return node_; }

 private:
  double node_;
};

}  // namespace gda
