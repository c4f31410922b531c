#pragma once

#include <stdexcept>
#include <string>

namespace ltls {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs outside an operation's domain (bad parameters, resonant degeneracy,
// evaluation outside a convergence disk, branch pinches on a path).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Raised by adiabatic-basis operations when delta == 0: the mixing angle is
// pinned at pi/4 and the basis is degenerate.
class ResonantDegeneracyError : public DomainError {
 public:
  using DomainError::DomainError;
};

// An integrand factor vanishes (or a cut is crossed) on the integration path.
class BranchPinchError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A numerical procedure failed to converge. `last_reliable` carries the last
// abscissa (time, path parameter, ...) at which the state was trustworthy.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_reliable)
      : Error(what), last_reliable_(last_reliable) {}

  double last_reliable() const noexcept { return last_reliable_; }

 private:
  double last_reliable_;
};

}  // namespace ltls
