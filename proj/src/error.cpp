#include "fbmvar/error.hpp"

#include <sstream>

namespace fbmvar {

namespace {

std::string spectral_message(std::size_t index, double eigenvalue) {
  std::ostringstream os;
  os << "circulant embedding failed: eigenvalue " << index << " = " << eigenvalue
     << " is below the clamp threshold";
  return os.str();
}

std::string cholesky_message(std::size_t minor, double pivot) {
  std::ostringstream os;
  os << "covariance matrix is not positive definite: leading minor " << minor
     << " has pivot " << pivot;
  return os.str();
}

}  // namespace

SpectralError::SpectralError(std::size_t index, double eigenvalue)
    : Error(spectral_message(index, eigenvalue)), index_(index), eigenvalue_(eigenvalue) {}

CholeskyError::CholeskyError(std::size_t minor, double pivot)
    : Error(cholesky_message(minor, pivot)), minor_(minor) {}

}  // namespace fbmvar
