#pragma once

#include <complex>
#include <vector>

#include "becsplit/grid.hpp"

namespace becsplit {

using cplx = std::complex<double>;

// Complex field sampled on a spatial grid. The physical normalization is
// sum_i |psi_i|^2 dx = 1.
struct Wavefunction {
  SpatialGrid grid;
  std::vector<cplx> values;

  double norm_sq() const;  // sum |psi|^2 dx
  void normalize();        // rescale to unit norm; throws on a null field
  bool is_normalized(double tol = 1e-8) const;
};

}  // namespace becsplit
