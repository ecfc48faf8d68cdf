#include "becsplit/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "becsplit/errors.hpp"
#include "becsplit/fft.hpp"
#include "becsplit/kernels.hpp"

namespace becsplit::gpe {

double center_of_mass(const Wavefunction& psi) {
  const auto xs = psi.grid.x_values();
  return kernels::active().weighted_density_sum(psi.values.data(), xs.data(),
                                                psi.values.size()) *
         psi.grid.dx();
}

MomentumDensity momentum_density(const Wavefunction& psi) {
  const int n = psi.grid.n;
  Fft1D fft(n);
  std::vector<cplx> hat = psi.values;
  fft.forward(hat.data());

  const double dx = psi.grid.dx();
  const double scale = dx * dx / (2.0 * std::numbers::pi);
  MomentumDensity out;
  out.k.resize(n);
  out.density.resize(n);
  for (int i = 0; i < n; ++i) {
    const int m = i - n / 2;                 // monotone order
    const int bin = (i + n / 2) % n;         // matching FFT bin
    out.k[i] = m * psi.grid.dk();
    out.density[i] = std::norm(hat[bin]) * scale;
  }
  return out;
}

double tof_wavenumber(double x, double T_tof, const PhysicalConstants& pc) {
  if (!(T_tof > 0.0)) throw ConfigError("tof: expansion time must be positive");
  if (!(pc.eta > 0.0)) throw ConfigError("tof: eta must be positive");
  return x / (pc.eta * T_tof);
}

namespace {

struct Params {
  double a;  // amplitude
  double s;  // sigma_psi
  double d;  // separation
};

// Peak-based starting point: separation from the two strongest interior
// local maxima, width from the second moment, amplitude from the peak value.
Params initial_guess(std::span<const double> x, std::span<const double> y,
                     FitSpace space) {
  const std::size_t n = x.size();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0) maxima.push_back(i);
  std::sort(maxima.begin(), maxima.end(),
            [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });

  double total = 0.0, m2 = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += y[i];
    m2 += y[i] * x[i] * x[i];
    peak = std::max(peak, y[i]);
  }
  if (!(total > 0.0) || !(peak > 0.0))
    throw NumericalError("fit: degenerate density profile");
  const double spacing = n > 1 ? std::abs(x[1] - x[0]) : 1.0;

  Params p;
  if (space == FitSpace::kPosition) {
    p.d = 0.0;
    if (maxima.size() >= 2) {
      const double sep = std::abs(x[maxima[0]] - x[maxima[1]]);
      if (sep > 2.0 * spacing) p.d = sep;
    }
    const double var = std::max(m2 / total - 0.25 * p.d * p.d, spacing * spacing);
    p.s = std::sqrt(var);
    const double u0 = 1.0 + std::exp(-p.d * p.d / (2.0 * p.s * p.s));
    p.a = std::sqrt(peak) / u0;
  } else {
    // Fringe spacing 2 pi / d between interior maxima on one side of k = 0.
    p.d = 0.0;
    std::vector<double> side;
    for (std::size_t i : maxima)
      if (x[i] > spacing) side.push_back(x[i]);
    std::sort(side.begin(), side.end());
    if (!side.empty()) p.d = 2.0 * std::numbers::pi / side.front();
    // rho(0)/integral fixes sigma up to the lobe-overlap factor.
    const double integral = total * spacing;
    p.s = std::max(0.75 * std::sqrt(std::numbers::pi) * peak / (2.0 * integral),
                   1e-3);
    p.a = std::sqrt(peak) / (2.0 * p.s);
  }
  return p;
}

bool solve3(const double M[9], const double b[3], double out[3]) {
  double a[9];
  std::copy(M, M + 9, a);
  double rhs[3] = {b[0], b[1], b[2]};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[3 * r + col]) > std::abs(a[3 * piv + col])) piv = r;
    if (std::abs(a[3 * piv + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < 3; ++c) std::swap(a[3 * piv + c], a[3 * col + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[3 * r + col] / a[3 * col + col];
      for (int c = col; c < 3; ++c) a[3 * r + c] -= f * a[3 * col + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double v = rhs[r];
    for (int c = r + 1; c < 3; ++c) v -= a[3 * r + c] * out[c];
    out[r] = v / a[3 * r + r];
  }
  return true;
}

}  // namespace

GaussianPairFit fit_gaussian_pair(std::span<const double> axis,
                                  std::span<const double> density,
                                  FitSpace space,
                                  const GaussianPairFit* warm_start) {
  if (axis.size() != density.size() || axis.size() < 8)
    throw ConfigError("fit: axis and density must match and hold >= 8 samples");
  const std::size_t n = axis.size();
  const double spacing = std::abs(axis[1] - axis[0]);

  const Params detected = initial_guess(axis, density, space);

  // Box constraints keep the optimizer on physically meaningful ground: the
  // separation and width cannot exceed the observation window (position
  // space) or the Nyquist scale of the k-axis sampling (momentum space,
  // where both parameters are position-space lengths). Without the cap the
  // model can leave the window entirely, the cost landscape goes flat, and
  // the fit random-walks to absurd separations.
  const double s_floor =
      space == FitSpace::kPosition ? 0.25 * spacing : 1e-4;
  const double box = space == FitSpace::kPosition
                         ? std::abs(axis.back() - axis.front())
                         : std::numbers::pi / spacing;
  auto project = [&](Params& q) {
    q.a = std::abs(q.a);
    q.s = std::clamp(std::abs(q.s), s_floor, box);
    q.d = std::min(std::abs(q.d), box);
  };

  // The model, residual sum and Gauss-Newton terms all come from the fused
  // backend kernel: one pass per iteration for J^T J / J^T r, cost-only
  // passes for the damped trial steps.
  const auto misfit = space == FitSpace::kPosition
                          ? kernels::active().pair_misfit_pos
                          : kernels::active().pair_misfit_mom;
  auto evaluate = [&](const Params& q, double* jtj, double* jtr) {
    return misfit(axis.data(), density.data(), n, q.a, q.s, q.d, jtj, jtr);
  };

  auto run_lm = [&](Params p) {
    project(p);
    double lambda = 1e-3;
    double JTJ[9];
    double JTr[3];
    double current = evaluate(p, JTJ, JTr);
    for (int iter = 0; iter < 200; ++iter) {
      // For a merged cloud the separation column of J vanishes and its
      // Gauss-Newton curvature is pure roundoff, which would otherwise
      // hijack the step with huge meaningless d moves. Freeze d and fit a, s
      // only.
      const bool d_inactive = JTJ[8] <= 1e-9 * (JTJ[0] + JTJ[4]);
      bool stepped = false;
      for (int tries = 0; tries < 12 && !stepped; ++tries) {
        double M[9];
        std::copy(JTJ, JTJ + 9, M);
        for (int a = 0; a < 3; ++a)
          M[3 * a + a] += lambda * std::max(JTJ[3 * a + a], 1e-12);
        double delta[3];
        double rhs[3] = {-JTr[0], -JTr[1], -JTr[2]};
        if (d_inactive) {
          M[2] = M[5] = M[6] = M[7] = 0.0;
          M[8] = 1.0;
          rhs[2] = 0.0;
        }
        if (solve3(M, rhs, delta)) {
          Params trial{p.a + delta[0], p.s + delta[1], p.d + delta[2]};
          project(trial);
          const double trial_cost = evaluate(trial, nullptr, nullptr);
          // Strict improvement only: accepting cost-neutral steps lets the
          // iterate drift along flat plateaus of the landscape.
          if (trial_cost < current) {
            const double rel_step =
                std::abs(delta[0]) + std::abs(delta[1]) + std::abs(delta[2]);
            p = trial;
            current = trial_cost;
            lambda = std::max(lambda * 0.3, 1e-12);
            stepped = true;
            if (rel_step < 1e-12 * (1.0 + p.a + p.s + p.d)) {
              iter = 200;
            } else {
              current = evaluate(p, JTJ, JTr);
            }
            break;
          }
        }
        lambda *= 4.0;
        if (lambda > 1e10) break;
      }
      if (!stepped) break;
    }
    return std::pair<Params, double>(p, current);
  };

  // The fit is multimodal: a merged cloud hides the separation (fresh
  // detection collapses to d = 0) while transient shoulders of a sloshing
  // cloud offer a spurious wide-separation minimum. Run from both the fresh
  // detection and the previous frame, then prefer the continuation: a
  // deforming cloud passes through shapes that several local minima describe
  // comparably well, and frame-to-frame coherence keeps the series from
  // toggling between them every slosh cycle. The fresh detection only takes
  // over on a decisive cost margin, the signature of a continuation that
  // lost the physical basin entirely (typically stranded on a flat plateau
  // at several times the true misfit).
  auto [p, current] = run_lm(detected);
  if (warm_start != nullptr && warm_start->sigma_psi > 0.0) {
    Params w{warm_start->amplitude, warm_start->sigma_psi, warm_start->d};
    const auto [p_w, cost_w] = run_lm(w);
    if (!(current < 0.25 * cost_w)) {
      p = p_w;
      current = cost_w;
    }
  }

  if (!std::isfinite(current) || !(p.s > 0.0))
    throw NumericalError("fit: Levenberg-Marquardt did not converge");

  GaussianPairFit out;
  out.amplitude = p.a;
  out.sigma_psi = p.s;
  out.d = p.d;
  out.residual = std::sqrt(current / n);
  return out;
}

}  // namespace becsplit::gpe
