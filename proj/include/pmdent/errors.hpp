#pragma once

#include <stdexcept>
#include <string>

namespace pmdent {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant (bad FWHM, bad order, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The spectral supports entering the coherence integral do not overlap.
class DegenerateSupport : public Error {
public:
  using Error::Error;
};

class NonUniformGrid : public Error {
public:
  using Error::Error;
};

/// Time grid of the time-domain overlap violates its sampling or span requirement.
class GridTooCoarse : public Error {
public:
  using Error::Error;
};

class CoherenceOutOfRange : public Error {
public:
  using Error::Error;
};

/// Density-matrix validation failure. `kind()` is one of
/// "not-hermitian", "bad-trace", "not-psd".
class InvalidState : public Error {
public:
  InvalidState(std::string kind, const std::string& what)
      : Error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class SingularDesign : public Error {
public:
  using Error::Error;
};

/// |R| never reaches the requested level inside the search horizon.
class NoCrossing : public Error {
public:
  using Error::Error;
};

}  // namespace pmdent
