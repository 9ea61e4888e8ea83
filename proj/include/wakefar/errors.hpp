#pragma once

#include <stdexcept>
#include <string>

namespace wakefar {

/// Base of every error raised by the library. Each subclass corresponds to one
/// failure kind so callers (and the CLI exit-code mapping) can dispatch on type.
class WakeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WAKEFAR_DEFINE_ERROR(Name)         \
  class Name : public WakeError {          \
   public:                                 \
    using WakeError::WakeError;            \
  }

WAKEFAR_DEFINE_ERROR(NonPositiveField);
WAKEFAR_DEFINE_ERROR(AxisSingularity);
WAKEFAR_DEFINE_ERROR(OutOfSupport);
WAKEFAR_DEFINE_ERROR(OutsideWindow);
WAKEFAR_DEFINE_ERROR(BadConstants);
WAKEFAR_DEFINE_ERROR(IntegrationFailure);
WAKEFAR_DEFINE_ERROR(StepUnderflow);
WAKEFAR_DEFINE_ERROR(JacobianSingular);
WAKEFAR_DEFINE_ERROR(DegenerateHomogeneous);
WAKEFAR_DEFINE_ERROR(NonzeroN);
WAKEFAR_DEFINE_ERROR(PoleProximity);
WAKEFAR_DEFINE_ERROR(ZeroDenominator);
WAKEFAR_DEFINE_ERROR(MeshTooSmall);
WAKEFAR_DEFINE_ERROR(WindowTooShort);
WAKEFAR_DEFINE_ERROR(ConfigError);
WAKEFAR_DEFINE_ERROR(IoError);
WAKEFAR_DEFINE_ERROR(MonotonicityError);
WAKEFAR_DEFINE_ERROR(NoConvergence);
WAKEFAR_DEFINE_ERROR(DegenerateSeries);

#undef WAKEFAR_DEFINE_ERROR

/// E or G reached zero (or the solution blew up) inside the integration
/// interval. `location` is the similarity radius where it happened.
class BlowupOrExtinction : public IntegrationFailure {
 public:
  BlowupOrExtinction(const std::string& what, double location)
      : IntegrationFailure(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

class ParseError : public WakeError {
 public:
  ParseError(const std::string& what, int line)
      : WakeError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace wakefar
