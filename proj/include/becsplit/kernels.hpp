#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace becsplit::kernels {

using cplx = std::complex<double>;

// Table of the arithmetic inner loops of the solver. There is one scalar
// reference implementation and, on capable x86-64 hosts, an AVX2+FMA variant;
// the active table is picked once at startup (overridable for tests and via
// the CLI). All routines accept unaligned pointers and arbitrary lengths.
//
// Backends are equivalence-tested against each other; they may differ in the
// last few ulps because vector lanes reassociate reductions.
struct Backend {
  const char* name;

  // a[i] *= b[i]
  void (*cmul_inplace)(cplx* a, const cplx* b, std::size_t n);
  // a[i] *= s
  void (*scale_inplace)(cplx* a, double s, std::size_t n);
  // out[i] = |a[i]|^2
  void (*density)(const cplx* a, double* out, std::size_t n);
  // sum_i |a[i]|^2
  double (*sum_density)(const cplx* a, std::size_t n);
  // sum_i w[i] |a[i]|^2
  double (*weighted_density_sum)(const cplx* a, const double* w, std::size_t n);
  // sum_i |a[i]|^4
  double (*sum_density_sq)(const cplx* a, std::size_t n);
  // sum_i w[i] Re(conj(a[i]) b[i])
  double (*weighted_inner_re)(const cplx* a, const cplx* b, const double* w,
                              std::size_t n);
  // a[i] *= exp(-i s theta[i])
  void (*phase_apply)(cplx* a, const double* theta, double s, std::size_t n);
  // psi[i] *= exp(-i dt (V[i] + g |psi[i]|^2))
  void (*nonlinear_phase)(cplx* psi, const double* V, double g, double dt,
                          std::size_t n);
  // psi[i] *= exp(-dt (V[i] + g |psi[i]|^2)), the imaginary-time analogue
  void (*nonlinear_decay)(cplx* psi, const double* V, double g, double dt,
                          std::size_t n);
  // V[i] = a4 x[i]^4 + a2 x[i]^2
  void (*quartic_potential)(const double* x, double a2, double a4, double* V,
                            std::size_t n);
  // One explicit midpoint step of dp/dt = -i g psi^2 conj(p) over dt:
  //   k1 = -i b conj(p);  pm = p + dt/2 k1;  p += dt (-i b conj(pm)),
  // with b = g psi[i]^2 held fixed.
  void (*coupling_kick)(cplx* p, const cplx* psi, double g, double dt,
                        std::size_t n);
  // Gaussian-pair misfit accumulators against samples (x[i], y[i]) for the
  // position-space model a^2 (e^{-(x-d/2)^2/2s^2} + e^{-(x+d/2)^2/2s^2})^2.
  // Returns sum r^2 with r = model - y; when jtj/jtr are non-null they are
  // overwritten with the Gauss-Newton terms J^T J (row-major 3x3, parameter
  // order a, s, d) and J^T r.
  double (*pair_misfit_pos)(const double* x, const double* y, std::size_t n,
                            double a, double s, double d, double* jtj,
                            double* jtr);
  // Same for the momentum-space model 2 a^2 s^2 e^{-s^2 k^2}(1 + cos(d k)).
  double (*pair_misfit_mom)(const double* x, const double* y, std::size_t n,
                            double a, double s, double d, double* jtj,
                            double* jtr);
};

const Backend& scalar();

// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const Backend* avx2();

// The runtime-selected table: AVX2 when available, otherwise scalar.
const Backend& active();

// "auto", "scalar" or "avx2". Throws ConfigError for unknown names or when
// "avx2" is requested on a host without it.
void force_backend(std::string_view name);

std::string_view active_name();

}  // namespace becsplit::kernels
