#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "becsplit/constants.hpp"
#include "becsplit/control.hpp"
#include "becsplit/gpe.hpp"
#include "becsplit/grid.hpp"
#include "becsplit/model.hpp"
#include "becsplit/wavefunction.hpp"

namespace becsplit::experiments {

enum class ExperimentKind { kLinearRamp, kConsecutiveLinearRamp, kOffset };

// Fixed first segment of the consecutive-linear-ramp schedule; only the end
// value of the second segment varies. Declared configuration constants,
// stored alongside results.
inline constexpr double kClrMidValue = 0.45;
inline constexpr double kClrSegmentTime = 0.5;

// One identification experiment: ramp (or displace) the condensate, hold,
// record an observable, measure its dominant oscillation frequencies.
// For Offset experiments A_end doubles as the static holding value A_T and
// A_start / T_R are unused.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kLinearRamp;
  double A_start = 0.28;
  double A_end = 0.5;
  double T_R = 1.0;        // ramp duration, LinearRamp only
  double offset_x = 0.1;   // initial displacement, Offset only
  double T_hold = 4.0;
  double sample_dt = 0.01;

  // Throws ConfigError on out-of-range values or a hold/ramp schedule that
  // does not align with the sampling raster.
  void validate() const;

  // Ramps that never cross the splitting value cannot probe the upper
  // branch; such configurations run fine but deserve a caller-side warning.
  bool below_split(double A_s) const;

  double ramp_duration() const;
  std::string label() const;

  bool operator==(const ExperimentSpec&) const = default;
};

// Frequencies of the hold-phase observable, strongest spectral peak first.
struct FrequencyMeasurement {
  ExperimentSpec experiment;
  std::vector<double> frequencies;
  double q = 1.0;  // noise variance per frequency component
};

// Sampled control trajectory of the experiment: ramp segments followed by the
// hold (Offset experiments hold throughout).
ControlTrajectory build_control(const ExperimentSpec& spec, double dt = 1e-3);

// Observable trace over the hold phase, one value per sample_dt.
struct HoldSeries {
  std::vector<double> times;   // absolute time, starting at the hold
  std::vector<double> values;  // x-bar for Offset, fitted d otherwise
};

// Simulates experiments that share one parameter set, reusing ground states
// across specs. Ground states always start from the deterministic analytic
// seed (never from a neighbouring cached state) so results are independent of
// call order; that keeps batch output identical under any work partition.
// Not thread-safe; use one Runner per thread.
class Runner {
 public:
  Runner(const model::ModelParameters& p, const SpatialGrid& grid,
         PhysicalConstants pc = {});

  const model::ModelParameters& params() const { return p_; }

  // Ground state at control value A, cached per A.
  const Wavefunction& ground_state(double A);

  // Pre-ramp state: ground state at A_start, displaced for Offset.
  Wavefunction initial_state(const ExperimentSpec& spec);

  HoldSeries hold_series(const ExperimentSpec& spec);

  // The n_freq dominant angular frequencies of the hold-phase observable.
  // Throws NumericalError naming the experiment when the spectrum carries
  // fewer significant peaks than requested.
  FrequencyMeasurement simulate(const ExperimentSpec& spec, int n_freq = 1);

  // Up to max_peaks dominant angular frequencies, strongest first; returns
  // fewer instead of throwing when the spectrum is sparser. Sensitivity
  // probes use the spare candidates to follow one oscillation across
  // perturbed models even when the peak powers reorder.
  std::vector<double> candidate_frequencies(const ExperimentSpec& spec,
                                            int max_peaks);

 private:
  model::ModelParameters p_;
  model::TrapPotential pot_;
  gpe::SplitStepSolver solver_;
  double control_dt_ = 1e-3;
  std::map<long long, Wavefunction> ground_cache_;
};

// One-shot wrappers over a fresh Runner.
Wavefunction initial_state(const ExperimentSpec& spec,
                           const model::ModelParameters& p,
                           const SpatialGrid& grid, PhysicalConstants pc = {});
FrequencyMeasurement simulate_experiment(const ExperimentSpec& spec,
                                         const model::ModelParameters& p,
                                         const SpatialGrid& grid,
                                         int n_freq = 1,
                                         PhysicalConstants pc = {});

// Adds i.i.d. zero-mean Gaussian perturbations of variance q to each
// frequency, deterministically per seed. q = 0 returns the input unchanged.
FrequencyMeasurement add_measurement_noise(const FrequencyMeasurement& m,
                                           double q, std::uint64_t seed);

}  // namespace becsplit::experiments
