#include "becsplit/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "becsplit/errors.hpp"
#include "becsplit/kernels.hpp"

namespace becsplit::gpe {

using kernels::active;

SplitStepSolver::SplitStepSolver(const SpatialGrid& grid, PhysicalConstants pc)
    : grid_(grid), pc_(pc), fft_(grid.n) {
  grid_.validate();
  if (!(pc_.eta > 0.0)) throw ConfigError("solver: eta must be positive");
  x_ = grid_.x_values();
  k2_ = grid_.k_squared();
  V_.resize(grid_.n);
  khalf_.resize(grid_.n);
  kfull_.resize(grid_.n);
}

void SplitStepSolver::check_state(const Wavefunction& psi) const {
  if (!(psi.grid == grid_))
    throw ConfigError("solver: wavefunction grid does not match solver grid");
  if (psi.values.size() != static_cast<std::size_t>(grid_.n))
    throw ConfigError("solver: wavefunction sample count mismatch");
}

void SplitStepSolver::build_potential(const model::PotentialModel& pot,
                                      double A) {
  const auto [a2, a4] = pot.coeffs(A);
  active().quartic_potential(x_.data(), a2, a4, V_.data(), x_.size());
}

void SplitStepSolver::build_kinetic_tables(double dt) {
  if (dt == table_dt_) return;
  const double inv_n = 1.0 / grid_.n;
  for (int i = 0; i < grid_.n; ++i) {
    const double w = 0.5 * pc_.eta * k2_[i];
    khalf_[i] = std::polar(inv_n, -w * 0.5 * dt);
    kfull_[i] = std::polar(inv_n, -w * dt);
  }
  table_dt_ = dt;
}

StateTrajectory SplitStepSolver::propagate(const Wavefunction& psi0,
                                           const model::PotentialModel& pot,
                                           double g, const ControlTrajectory& u,
                                           int record_every) {
  StateTrajectory out;
  propagate(psi0, pot, g, u, record_every,
            [&out](int, double t, const Wavefunction& psi) {
              out.times.push_back(t);
              out.states.push_back(psi);
            });
  return out;
}

void SplitStepSolver::propagate(const Wavefunction& psi0,
                                const model::PotentialModel& pot, double g,
                                const ControlTrajectory& u, int record_every,
                                const RecordSink& sink) {
  check_state(psi0);
  u.validate();
  if (record_every < 1)
    throw ConfigError("solver: record_every must be at least 1");
  if (!psi0.is_normalized(1e-6))
    throw ConfigError("solver: psi0 must be normalized");
  if (!(g >= 0.0)) throw ConfigError("solver: g must be non-negative");

  const int steps = u.steps();
  const double dt = u.dt;
  build_kinetic_tables(dt);

  Wavefunction psi = psi0;
  cplx* d = psi.values.data();
  const std::size_t n = psi.values.size();

  sink(0, 0.0, psi);
  // Fused Strang loop: between record points, adjacent half-kinetic factors
  // merge into a single full step, so the bulk of the run costs two
  // transforms per step.
  bool entry_half_pending = true;
  for (int s = 0; s < steps; ++s) {
    if (entry_half_pending) {
      fft_.forward(d);
      active().cmul_inplace(d, khalf_.data(), n);
      fft_.backward(d);
    }
    build_potential(pot, u.midpoint(s));
    active().nonlinear_phase(d, V_.data(), g, dt, n);

    const bool record = ((s + 1) % record_every == 0) || (s + 1 == steps);
    fft_.forward(d);
    active().cmul_inplace(d, record ? khalf_.data() : kfull_.data(), n);
    fft_.backward(d);
    entry_half_pending = record;
    if (record) sink(s + 1, (s + 1) * dt, psi);
  }
}

SplitStepSolver::ForwardSweep SplitStepSolver::propagate_store_mid(
    const Wavefunction& psi0, const model::PotentialModel& pot, double g,
    const ControlTrajectory& u) {
  check_state(psi0);
  u.validate();
  if (!psi0.is_normalized(1e-6))
    throw ConfigError("solver: psi0 must be normalized");

  const int steps = u.steps();
  const double dt = u.dt;
  build_kinetic_tables(dt);

  ForwardSweep sweep;
  sweep.mid.reserve(steps);
  sweep.mid_A.reserve(steps);

  Wavefunction psi = psi0;
  cplx* d = psi.values.data();
  const std::size_t n = psi.values.size();

  fft_.forward(d);
  active().cmul_inplace(d, khalf_.data(), n);
  fft_.backward(d);
  for (int s = 0; s < steps; ++s) {
    sweep.mid.push_back(psi.values);
    sweep.mid_A.push_back(u.midpoint(s));
    build_potential(pot, u.midpoint(s));
    active().nonlinear_phase(d, V_.data(), g, dt, n);
    fft_.forward(d);
    active().cmul_inplace(d, s + 1 < steps ? kfull_.data() : khalf_.data(), n);
    fft_.backward(d);
  }
  sweep.terminal = psi;
  return sweep;
}

Wavefunction SplitStepSolver::ground_state(const model::PotentialModel& pot,
                                           double g, double A,
                                           const GroundStateOptions& opts) {
  if (!(opts.tol > 0.0) || !(opts.dt > 0.0) || opts.max_iter < 1 ||
      opts.check_every < 1)
    throw ConfigError("ground_state: invalid options");

  Wavefunction psi;
  if (opts.initial != nullptr) {
    check_state(*opts.initial);
    psi = *opts.initial;
  } else {
    // Harmonic estimate around the minimum (a symmetric pair of lobes above
    // the split). Imaginary time straightens out whatever this gets wrong.
    psi.grid = grid_;
    psi.values.resize(grid_.n);
    const auto [a2, a4] = pot.coeffs(A);
    double xm = 0.0;
    if (a2 < 0.0 && a4 > 0.0) xm = std::sqrt(-a2 / (2.0 * a4));
    const double curv = 12.0 * a4 * xm * xm + 2.0 * a2;  // V'' at the minimum
    double sigma2 = 0.25;
    if (curv > 0.0) sigma2 = 0.5 * std::sqrt(pc_.eta / curv);
    for (int i = 0; i < grid_.n; ++i) {
      const double xp = x_[i] - xm;
      const double xn = x_[i] + xm;
      psi.values[i] = std::exp(-xp * xp / (4.0 * sigma2)) +
                      std::exp(-xn * xn / (4.0 * sigma2));
    }
  }
  psi.normalize();

  build_potential(pot, A);

  cplx* d = psi.values.data();
  const std::size_t n = psi.values.size();
  const double dx = grid_.dx();
  const double inv_n = 1.0 / grid_.n;

  double dt = opts.dt;
  // Real decay tables, backward-transform scale folded in as usual.
  std::vector<double> dhalf(grid_.n), dfull(grid_.n);
  auto build_decay_tables = [&] {
    for (int i = 0; i < grid_.n; ++i) {
      const double w = 0.5 * pc_.eta * k2_[i];
      dhalf[i] = std::exp(-w * 0.5 * dt) * inv_n;
      dfull[i] = std::exp(-w * dt) * inv_n;
    }
  };
  build_decay_tables();
  auto apply_real_table = [&](const std::vector<double>& tab) {
    for (std::size_t i = 0; i < n; ++i) d[i] *= tab[i];
  };

  // In imaginary time the amplitude decays during the potential factor, so
  // evaluating |psi|^2 at the substep entry costs a first-order bias. A
  // predictor pass supplies the (renormalized) midpoint density instead.
  std::vector<double> rho_mid(n), veff(n);
  std::vector<cplx> entry(n);
  auto centered_decay = [&] {
    if (g == 0.0) {
      active().nonlinear_decay(d, V_.data(), 0.0, dt, n);
      return;
    }
    active().density(d, rho_mid.data(), n);
    std::copy(d, d + n, entry.begin());
    active().nonlinear_decay(d, V_.data(), g, dt, n);
    const double renorm = 1.0 / (active().sum_density(d, n) * dx);
    const double half_g = 0.5 * g;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho_end = std::norm(d[i]) * renorm;
      veff[i] = V_[i] + half_g * (rho_mid[i] + rho_end);
    }
    std::copy(entry.begin(), entry.end(), d);
    active().nonlinear_decay(d, veff.data(), 0.0, dt, n);
  };

  double e_prev = energy(psi, pot, g, A);
  double residual = std::numeric_limits<double>::infinity();
  double r_prev = residual;
  const double dt_min = opts.dt * 1e-4;

  long iter = 0;
  while (iter < opts.max_iter) {
    // Constant imaginary-time checkpoint interval, so the per-checkpoint
    // contraction (and with it stall detection) is independent of dt.
    const long per_check =
        std::max<long>(opts.check_every,
                       std::llround(opts.check_every * opts.dt / dt));
    const long stretch = std::min<long>(per_check, opts.max_iter - iter);

    // Enter the midpoint of the first step of this stretch.
    fft_.forward(d);
    apply_real_table(dhalf);
    fft_.backward(d);
    for (long s = 0; s < stretch; ++s) {
      centered_decay();
      fft_.forward(d);
      apply_real_table(s + 1 < stretch ? dfull : dhalf);
      // Renormalize in k space (Parseval: position norm^2 = n * sum |.|^2 dx
      // after the 1/n fold).
      const double n2 =
          static_cast<double>(grid_.n) * active().sum_density(d, n) * dx;
      active().scale_inplace(d, 1.0 / std::sqrt(n2), n);
      fft_.backward(d);
    }
    iter += stretch;

    const double e_now = energy(psi, pot, g, A);
    if (opts.energy_trace != nullptr) opts.energy_trace->push_back(e_now);
    // Residual of the GP eigenproblem: ||(H - mu) psi|| with mu = <H>.
    auto hpsi = apply_hamiltonian(psi, pot, g, A);
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      mu += (std::conj(psi.values[i]) * hpsi[i]).real();
    mu *= dx;
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      r2 += std::norm(hpsi[i] - mu * psi.values[i]);
    residual = std::sqrt(r2 * dx);

    const double de_per_step = std::abs(e_now - e_prev) / stretch;
    e_prev = e_now;
    if (de_per_step < opts.tol && residual < opts.tol) return psi;

    // Residual no longer contracting: this dt's bias floor. Shrink toward
    // the step size whose floor sits safely under tol (floor ~ dt^2).
    if (residual > 0.9 * r_prev && residual >= opts.tol && dt > dt_min) {
      const double shrink = std::clamp(
          0.5 * std::sqrt(opts.tol / residual), 0.1, 0.5);
      dt = std::max(dt * shrink, dt_min);
      build_decay_tables();
    }
    r_prev = residual;
  }
  throw ConvergenceError(
      "ground_state: no convergence within " + std::to_string(opts.max_iter) +
          " iterations (residual " + std::to_string(residual) + ")",
      residual);
}

double SplitStepSolver::energy(const Wavefunction& psi,
                               const model::PotentialModel& pot, double g,
                               double A) {
  check_state(psi);
  const std::size_t n = psi.values.size();
  const double dx = grid_.dx();

  std::vector<cplx> hat = psi.values;
  fft_.forward(hat.data());
  const double kinetic = 0.5 * pc_.eta *
                         active().weighted_density_sum(hat.data(), k2_.data(), n) *
                         dx / grid_.n;
  build_potential(pot, A);
  const double potential =
      active().weighted_density_sum(psi.values.data(), V_.data(), n) * dx;
  const double interaction =
      0.5 * g * active().sum_density_sq(psi.values.data(), n) * dx;
  return kinetic + potential + interaction;
}

std::vector<cplx> SplitStepSolver::apply_hamiltonian(
    const Wavefunction& psi, const model::PotentialModel& pot, double g_coeff,
    double A) {
  check_state(psi);
  const std::size_t n = psi.values.size();

  std::vector<cplx> kin = psi.values;
  fft_.forward(kin.data());
  const double scale = 0.5 * pc_.eta / grid_.n;
  for (std::size_t i = 0; i < n; ++i) kin[i] *= scale * k2_[i];
  fft_.backward(kin.data());

  build_potential(pot, A);
  for (std::size_t i = 0; i < n; ++i)
    kin[i] += (V_[i] + g_coeff * std::norm(psi.values[i])) * psi.values[i];
  return kin;
}

Wavefunction SplitStepSolver::displaced(const Wavefunction& psi, double shift) {
  check_state(psi);
  Wavefunction out = psi;
  cplx* d = out.values.data();
  const std::size_t n = out.values.size();
  std::vector<double> ks = grid_.k_values();
  fft_.forward(d);
  active().phase_apply(d, ks.data(), shift, n);
  active().scale_inplace(d, 1.0 / grid_.n, n);
  fft_.backward(d);
  return out;
}

StateTrajectory propagate(const Wavefunction& psi0,
                          const model::ModelParameters& p,
                          const ControlTrajectory& u, int record_every,
                          PhysicalConstants pc) {
  p.validate();
  SplitStepSolver solver(psi0.grid, pc);
  return solver.propagate(psi0, model::TrapPotential(p), p.g_perp, u,
                          record_every);
}

Wavefunction ground_state(const model::ModelParameters& p, double A,
                          const SpatialGrid& grid, double tol,
                          PhysicalConstants pc) {
  p.validate();
  SplitStepSolver solver(grid, pc);
  GroundStateOptions opts;
  opts.tol = tol;
  return solver.ground_state(model::TrapPotential(p), p.g_perp, A, opts);
}

double energy(const Wavefunction& psi, const model::ModelParameters& p,
              double A, PhysicalConstants pc) {
  p.validate();
  SplitStepSolver solver(psi.grid, pc);
  return solver.energy(psi, model::TrapPotential(p), p.g_perp, A);
}

}  // namespace becsplit::gpe
