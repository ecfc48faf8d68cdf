#include <algorithm>
#include <cmath>
#include <complex>

#include "becsplit/kernels.hpp"

// Reference implementations. Deliberately plain loops over std::complex so
// the vector variants have an unambiguous semantic target.

namespace becsplit::kernels {
namespace {

void cmul_inplace(cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
}

void scale_inplace(cplx* a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= s;
}

void density(const cplx* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(a[i]);
}

double sum_density(const cplx* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i]);
  return s;
}

double weighted_density_sum(const cplx* a, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(a[i]);
  return s;
}

double sum_density_sq(const cplx* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::norm(a[i]);
    s += d * d;
  }
  return s;
}

double weighted_inner_re(const cplx* a, const cplx* b, const double* w,
                         std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return s;
}

void phase_apply(cplx* a, const double* theta, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -s * theta[i];
    a[i] *= cplx(std::cos(t), std::sin(t));
  }
}

void nonlinear_phase(cplx* psi, const double* V, double g, double dt,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -dt * (V[i] + g * std::norm(psi[i]));
    psi[i] *= cplx(std::cos(t), std::sin(t));
  }
}

void nonlinear_decay(cplx* psi, const double* V, double g, double dt,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= std::exp(-dt * (V[i] + g * std::norm(psi[i])));
}

void quartic_potential(const double* x, double a2, double a4, double* V,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x2 = x[i] * x[i];
    V[i] = (a4 * x2 + a2) * x2;
  }
}

void coupling_kick(cplx* p, const cplx* psi, double g, double dt,
                   std::size_t n) {
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx b = g * psi[i] * psi[i];
    const cplx k1 = mi * b * std::conj(p[i]);
    const cplx pm = p[i] + 0.5 * dt * k1;
    p[i] += dt * (mi * b * std::conj(pm));
  }
}

inline void accumulate_point(double r, const double J[3], double* jtj,
                             double* jtr) {
  for (int t = 0; t < 3; ++t) {
    jtr[t] += J[t] * r;
    for (int u = 0; u < 3; ++u) jtj[3 * t + u] += J[t] * J[u];
  }
}

double pair_misfit_pos(const double* x, const double* y, std::size_t n,
                       double a, double s, double d, double* jtj,
                       double* jtr) {
  if (jtj != nullptr) {
    std::fill(jtj, jtj + 9, 0.0);
    std::fill(jtr, jtr + 3, 0.0);
  }
  const double s2 = s * s;
  const double inv2s2 = 1.0 / (2.0 * s2);
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xp = x[i] - 0.5 * d;
    const double xm = x[i] + 0.5 * d;
    const double gp = std::exp(-xp * xp * inv2s2);
    const double gm = std::exp(-xm * xm * inv2s2);
    const double u = gp + gm;
    const double r = a * a * u * u - y[i];
    cost += r * r;
    if (jtj != nullptr) {
      const double J[3] = {2.0 * a * u * u,
                           2.0 * a * a * u * (gp * xp * xp + gm * xm * xm) /
                               (s2 * s),
                           2.0 * a * a * u * (gp * xp - gm * xm) / (2.0 * s2)};
      accumulate_point(r, J, jtj, jtr);
    }
  }
  return cost;
}

double pair_misfit_mom(const double* x, const double* y, std::size_t n,
                       double a, double s, double d, double* jtj,
                       double* jtr) {
  if (jtj != nullptr) {
    std::fill(jtj, jtj + 9, 0.0);
    std::fill(jtr, jtr + 3, 0.0);
  }
  const double s2 = s * s;
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double env = std::exp(-s2 * x[i] * x[i]);
    const double m = 2.0 * a * a * s2 * env * (1.0 + std::cos(d * x[i]));
    const double r = m - y[i];
    cost += r * r;
    if (jtj != nullptr) {
      const double J[3] = {2.0 * m / a, m * (2.0 / s - 2.0 * s * x[i] * x[i]),
                           -2.0 * a * a * s2 * env * x[i] *
                               std::sin(d * x[i])};
      accumulate_point(r, J, jtj, jtr);
    }
  }
  return cost;
}

}  // namespace

const Backend& scalar() {
  static const Backend table{
      "scalar",        cmul_inplace,    scale_inplace, density,
      sum_density,     weighted_density_sum, sum_density_sq, weighted_inner_re,
      phase_apply,     nonlinear_phase, nonlinear_decay, quartic_potential,
      coupling_kick,   pair_misfit_pos, pair_misfit_mom,
  };
  return table;
}

}  // namespace becsplit::kernels
