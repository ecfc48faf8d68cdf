#include "becsplit/grid.hpp"

#include <cmath>
#include <string>

#include "becsplit/errors.hpp"

namespace becsplit {

std::vector<double> SpatialGrid::x_values() const {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = x(i);
  return xs;
}

std::vector<double> SpatialGrid::k_values() const {
  std::vector<double> ks(n);
  for (int i = 0; i < n; ++i) ks[i] = k(i);
  return ks;
}

std::vector<double> SpatialGrid::k_squared() const {
  std::vector<double> k2(n);
  for (int i = 0; i < n; ++i) {
    const double ki = k(i);
    k2[i] = ki * ki;
  }
  return k2;
}

void SpatialGrid::validate() const {
  if (!(x_min < x_max))
    throw ConfigError("grid: x_min must be smaller than x_max");
  if (n < 8 || n % 2 != 0)
    throw ConfigError("grid: n must be even and at least 8, got " + std::to_string(n));
  if (std::abs(x_min + x_max) > 1e-12 * length())
    throw ConfigError("grid: must be symmetric about x = 0");
}

}  // namespace becsplit
