#pragma once

#include <stdexcept>
#include <string>

namespace skelchaos {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, mismatched dimensions, malformed files. CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// An analysis was asked for on data it is not defined for (e.g. Q on D != 2).
class ApplicabilityError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite values, singular systems, degenerate draws. CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SolverError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The CLE does not change sign inside the requested bracket. CLI exit code 4.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double rho_lo, double cle_lo, double rho_hi, double cle_hi)
      : Error(what), rho_lo(rho_lo), cle_lo(cle_lo), rho_hi(rho_hi), cle_hi(cle_hi) {}

  double rho_lo;
  double cle_lo;
  double rho_hi;
  double cle_hi;
};

}  // namespace skelchaos
