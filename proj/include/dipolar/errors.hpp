#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dipolar {

/// Wavelength (or other argument) outside the domain a table or model covers.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed dispersion table; carries the 1-based offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Material or stack violating a structural invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Formula evaluated exactly on a pole (e.g. surface-plasmon resonance).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fabry-Perot denominator vanished at the requested in-plane wavevector.
class PoleError : public std::domain_error {
 public:
  PoleError(double s, const std::string& what) : std::domain_error(what), s_(s) {}
  double s() const noexcept { return s_; }

 private:
  double s_;
};

/// Adaptive integration failed to reach tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double partial, double error_estimate)
      : std::runtime_error(what), partial_(partial), error_estimate_(error_estimate) {}
  double partial_sum() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double partial_;
  double error_estimate_;
};

/// Configuration the numerical model cannot represent (e.g. absorbing substrate for a
/// far-field pattern).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dipolar
