#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "becsplit/constants.hpp"
#include "becsplit/wavefunction.hpp"

namespace becsplit::gpe {

// First moment of the density, int x |psi|^2 dx.
double center_of_mass(const Wavefunction& psi);

// Momentum-space density |psihat(k)|^2 on a monotone k axis, normalized so
// that sum rho dk = 1 (continuum convention psihat = (2 pi)^{-1/2} int psi
// exp(-i k x) dx).
struct MomentumDensity {
  std::vector<double> k;
  std::vector<double> density;
};
MomentumDensity momentum_density(const Wavefunction& psi);

// Time-of-flight mapping between detector position and in-trap wavenumber,
// k = x / (eta T_tof).
double tof_wavenumber(double x, double T_tof, const PhysicalConstants& pc = {});

// Symmetric two-Gaussian description of a (possibly split) cloud:
//   psi(x) = A [exp(-(x-d/2)^2/(2 s^2)) + exp(-(x+d/2)^2/(2 s^2))],
// fitted to a density profile in position space, or to the equivalent
// momentum profile 2 A^2 s^2 exp(-s^2 k^2)(1 + cos(d k)).
struct GaussianPairFit {
  double amplitude = 0.0;
  double sigma_psi = 0.0;  // > 0
  double d = 0.0;          // >= 0; 0 means a single cloud
  double residual = 0.0;   // rms misfit per sample

  // Width of one momentum-space lobe, (sqrt(2) sigma_psi)^-1.
  double sigma_M() const { return 1.0 / (std::sqrt(2.0) * sigma_psi); }
};

enum class FitSpace { kPosition, kMomentum };

// Levenberg-Marquardt fit of the pair model to a sampled density profile.
// A warm start (e.g. the previous frame of a time series) skips the built-in
// peak-based initialization. Throws NumericalError when the fit degenerates.
GaussianPairFit fit_gaussian_pair(std::span<const double> axis,
                                  std::span<const double> density,
                                  FitSpace space,
                                  const GaussianPairFit* warm_start = nullptr);

}  // namespace becsplit::gpe
