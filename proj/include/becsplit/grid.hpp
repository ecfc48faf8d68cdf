#pragma once

#include <numbers>
#include <vector>

namespace becsplit {

// Uniform periodic grid, symmetric about x = 0. Point i sits at
// x_min + i*dx with dx = (x_max - x_min)/n; x_max itself is not a grid point
// (it aliases x_min). n must be even so the FFT wavenumbers pair up cleanly.
struct SpatialGrid {
  double x_min = -4.0;
  double x_max = 4.0;
  int n = 512;

  double length() const { return x_max - x_min; }
  double dx() const { return length() / n; }
  double x(int i) const { return x_min + i * dx(); }

  // Angular wavenumber spacing and the FFT-ordered wavenumber of bin i
  // (non-negative for i < n/2, negative above).
  double dk() const { return 2.0 * std::numbers::pi / length(); }
  double k(int i) const { return (i < n / 2 ? i : i - n) * dk(); }

  std::vector<double> x_values() const;
  std::vector<double> k_values() const;   // FFT bin order
  std::vector<double> k_squared() const;  // FFT bin order

  // Throws ConfigError on a degenerate or asymmetric grid.
  void validate() const;

  bool operator==(const SpatialGrid&) const = default;
};

}  // namespace becsplit
