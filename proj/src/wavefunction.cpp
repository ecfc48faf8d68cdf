#include "becsplit/wavefunction.hpp"

#include <cmath>

#include "becsplit/errors.hpp"
#include "becsplit/kernels.hpp"

namespace becsplit {

double Wavefunction::norm_sq() const {
  return kernels::active().sum_density(values.data(), values.size()) * grid.dx();
}

void Wavefunction::normalize() {
  const double n2 = norm_sq();
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw NumericalError("cannot normalize a null or non-finite wavefunction");
  kernels::active().scale_inplace(values.data(), 1.0 / std::sqrt(n2),
                                  values.size());
}

bool Wavefunction::is_normalized(double tol) const {
  return std::abs(norm_sq() - 1.0) <= tol;
}

}  // namespace becsplit
