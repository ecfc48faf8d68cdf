#pragma once

#include <functional>
#include <vector>

#include "becsplit/constants.hpp"
#include "becsplit/control.hpp"
#include "becsplit/fft.hpp"
#include "becsplit/grid.hpp"
#include "becsplit/model.hpp"
#include "becsplit/wavefunction.hpp"

namespace becsplit::gpe {

struct StateTrajectory {
  std::vector<double> times;
  std::vector<Wavefunction> states;
};

struct GroundStateOptions {
  double tol = 1e-6;       // thresholds for energy change per step and residual
  double dt = 1e-3;        // initial imaginary time step
  long max_iter = 200000;
  int check_every = 25;    // convergence test cadence, in steps at dt
  const Wavefunction* initial = nullptr;  // optional warm start
  // Checkpoint energies, appended in iteration order (diagnostics; the
  // sequence is non-increasing).
  std::vector<double>* energy_trace = nullptr;
};

// Split-step (Strang) solver for the one-dimensional GPE
//   i dpsi/dt = (-eta/2 d^2/dx^2 + V(x, A(t)) + g |psi|^2) psi
// on a fixed periodic grid. Kinetic factors act in Fourier space through
// precomputed phase tables; the control is read at step midpoints. One
// instance owns the FFT plans and scratch for its grid; not thread-safe.
class SplitStepSolver {
 public:
  explicit SplitStepSolver(const SpatialGrid& grid, PhysicalConstants pc = {});

  // Propagate under the sampled control, recording every record_every steps
  // (the initial and final states are always recorded).
  // Rejects a non-normalized psi0 or a mismatched grid.
  StateTrajectory propagate(const Wavefunction& psi0,
                            const model::PotentialModel& pot, double g,
                            const ControlTrajectory& u, int record_every);

  // Streaming variant; sink(step, t, psi) is called at every record point.
  using RecordSink =
      std::function<void(int step, double t, const Wavefunction& psi)>;
  void propagate(const Wavefunction& psi0, const model::PotentialModel& pot,
                 double g, const ControlTrajectory& u, int record_every,
                 const RecordSink& sink);

  // Forward sweep that keeps, for every step, the position-space state the
  // potential factor acted on (the "midpoint" state of the Strang step).
  // This is exactly what the adjoint integration pairs against.
  struct ForwardSweep {
    std::vector<std::vector<cplx>> mid;  // one state per step
    std::vector<double> mid_A;           // control midpoint per step
    Wavefunction terminal;
  };
  ForwardSweep propagate_store_mid(const Wavefunction& psi0,
                                   const model::PotentialModel& pot, double g,
                                   const ControlTrajectory& u);

  // Normalized imaginary-time ground state at fixed control value A. The
  // nonlinear factor is midpoint-centered, and once the split-step bias floor
  // at the current dt is reached (residual stalls above tol) the time step is
  // annealed downward, so tol is met in both the energy change per step and
  // the eigenvalue residual ||(H - mu) psi||. Checkpoints land at constant
  // imaginary-time intervals of check_every * opts.dt.
  // Throws ConvergenceError (with the last residual) when the budget runs out.
  Wavefunction ground_state(const model::PotentialModel& pot, double g,
                            double A, const GroundStateOptions& opts = {});

  // Energy functional E = int psi* (kinetic + V + g/2 |psi|^2) psi dx.
  double energy(const Wavefunction& psi, const model::PotentialModel& pot,
                double g, double A);

  // (kinetic + V(A) + g_coeff |psi|^2) psi. Note the chemical-potential
  // convention: pass the full g for the eigenvalue residual, g/2 appears only
  // in the energy.
  std::vector<cplx> apply_hamiltonian(const Wavefunction& psi,
                                      const model::PotentialModel& pot,
                                      double g_coeff, double A);

  // Exact spectral translation psi(x) -> psi(x - shift).
  Wavefunction displaced(const Wavefunction& psi, double shift);

  const SpatialGrid& grid() const { return grid_; }
  double eta() const { return pc_.eta; }

 private:
  void check_state(const Wavefunction& psi) const;
  void build_potential(const model::PotentialModel& pot, double A);
  void build_kinetic_tables(double dt);

  SpatialGrid grid_;
  PhysicalConstants pc_;
  Fft1D fft_;
  std::vector<double> x_, k2_, V_;
  // Kinetic phase tables for the current dt; the 1/n backward-transform
  // normalization is folded in so each FFT pair applies exactly one table.
  std::vector<cplx> khalf_, kfull_;
  double table_dt_ = 0.0;
};

// Convenience wrappers around a solver built on the spot, with the quartic
// trap model and g = p.g_perp.
StateTrajectory propagate(const Wavefunction& psi0,
                          const model::ModelParameters& p,
                          const ControlTrajectory& u, int record_every,
                          PhysicalConstants pc = {});
Wavefunction ground_state(const model::ModelParameters& p, double A,
                          const SpatialGrid& grid, double tol = 1e-6,
                          PhysicalConstants pc = {});
double energy(const Wavefunction& psi, const model::ModelParameters& p,
              double A, PhysicalConstants pc = {});

}  // namespace becsplit::gpe
