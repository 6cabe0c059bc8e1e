#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbmvar {

// Precondition violations are reported with std::invalid_argument; the types
// below cover numerical failures that depend on the data, not the call site.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Circulant embedding produced an eigenvalue below the clamp threshold.
class SpectralError : public Error {
 public:
  SpectralError(std::size_t index, double eigenvalue);
  std::size_t index() const noexcept { return index_; }
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::size_t index_;
  double eigenvalue_;
};

/// Dense factorization hit a non-positive pivot. `minor()` is 1-based.
class CholeskyError : public Error {
 public:
  CholeskyError(std::size_t minor, double pivot);
  std::size_t minor() const noexcept { return minor_; }

 private:
  std::size_t minor_;
};

}  // namespace fbmvar
