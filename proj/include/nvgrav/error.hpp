#pragma once

#include <stdexcept>
#include <string>

namespace nvgrav {

/// Base class for every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: bad parameter, bad unit, malformed configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Fock truncation too small for the requested dynamics.
class CutoffError : public Error {
 public:
  CutoffError(const std::string& what, int suggested_cutoff)
      : Error(what), suggested_cutoff_(suggested_cutoff) {}

  [[nodiscard]] int suggested_cutoff() const { return suggested_cutoff_; }

 private:
  int suggested_cutoff_;
};

}  // namespace nvgrav
