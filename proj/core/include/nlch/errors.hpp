#ifndef NLCH_ERRORS_HPP
#define NLCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nlch {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid grid/kernel/potential/dynamics configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Config-file syntax or schema problem; carries the offending line.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// API misuse: mismatched grids, wrong variant for a diagnostic, bad window.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Right-hand side handed to the inverse Neumann Laplacian has nonzero mean.
class MeanConstraintError : public Error {
public:
  using Error::Error;
};

/// The discretized kernel violates its structural hypotheses (finiteness,
/// nonnegative ambient field).
class KernelHypothesisError : public Error {
public:
  using Error::Error;
};

/// Potential evaluated outside (or at the boundary of) its admissible interval.
class PotentialDomainError : public Error {
public:
  PotentialDomainError(const std::string& msg, double value)
      : Error(msg), value_(value) {}
  double value() const { return value_; }

private:
  double value_;
};

/// Initial data violates the admissibility preconditions of a model variant.
class InitialDataError : public Error {
public:
  using Error::Error;
};

/// A time step could not be completed after all adaptive halvings.
class StepFailureError : public Error {
public:
  using Error::Error;
};

/// NaN/Inf detected in evolving fields.
class NumericalBlowupError : public Error {
public:
  using Error::Error;
};

/// Filesystem/serialization failure.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace nlch

#endif
