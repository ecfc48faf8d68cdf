#include "becsplit/experiments.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "becsplit/errors.hpp"
#include "becsplit/kernels.hpp"
#include "becsplit/observables.hpp"
#include "becsplit/spectral.hpp"

namespace becsplit::experiments {

using kernels::active;

namespace {

void check_unit_range(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError(std::string("experiment: ") + name +
                      " must lie in [0,1], got " + std::to_string(v));
}

}  // namespace

void ExperimentSpec::validate() const {
  check_unit_range(A_end, "A_end");
  if (!(T_hold > 0.0)) throw ConfigError("experiment: T_hold must be positive");
  if (!(sample_dt > 0.0))
    throw ConfigError("experiment: sample_dt must be positive");
  if (kind != ExperimentKind::kOffset) {
    check_unit_range(A_start, "A_start");
    if (kind == ExperimentKind::kLinearRamp && !(T_R > 0.0))
      throw ConfigError("experiment: T_R must be positive");
    // Hold samples must land on the observable raster.
    step_count(ramp_duration(), sample_dt);
  }
  step_count(T_hold, sample_dt);
  if (kind == ExperimentKind::kOffset && !std::isfinite(offset_x))
    throw ConfigError("experiment: offset_x must be finite");
}

bool ExperimentSpec::below_split(double A_s) const {
  if (kind == ExperimentKind::kOffset) return false;
  return A_end <= A_s;
}

double ExperimentSpec::ramp_duration() const {
  switch (kind) {
    case ExperimentKind::kLinearRamp: return T_R;
    case ExperimentKind::kConsecutiveLinearRamp: return 2.0 * kClrSegmentTime;
    case ExperimentKind::kOffset: return 0.0;
  }
  return 0.0;
}

std::string ExperimentSpec::label() const {
  char buf[96];
  switch (kind) {
    case ExperimentKind::kLinearRamp:
      std::snprintf(buf, sizeof buf, "LR(%.3g->%.3g, T_R=%.3g)", A_start,
                    A_end, T_R);
      break;
    case ExperimentKind::kConsecutiveLinearRamp:
      std::snprintf(buf, sizeof buf, "CLR(%.3g->%.3g->%.3g)", A_start,
                    kClrMidValue, A_end);
      break;
    case ExperimentKind::kOffset:
      std::snprintf(buf, sizeof buf, "Offset(A_T=%.3g, dx=%.3g)", A_end,
                    offset_x);
      break;
  }
  return buf;
}

ControlTrajectory build_control(const ExperimentSpec& spec, double dt) {
  spec.validate();
  const ControlTrajectory hold = constant_control(spec.A_end, spec.T_hold, dt);
  switch (spec.kind) {
    case ExperimentKind::kLinearRamp:
      return concat(linear_ramp(spec.A_start, spec.A_end, spec.T_R, dt), hold);
    case ExperimentKind::kConsecutiveLinearRamp:
      return concat(
          concat(linear_ramp(spec.A_start, kClrMidValue, kClrSegmentTime, dt),
                 linear_ramp(kClrMidValue, spec.A_end, kClrSegmentTime, dt)),
          hold);
    case ExperimentKind::kOffset:
      return hold;
  }
  throw ConfigError("experiment: unknown kind");
}

Runner::Runner(const model::ModelParameters& p, const SpatialGrid& grid,
               PhysicalConstants pc)
    : p_(p), pot_(p), solver_(grid, pc) {
  p_.validate();
}

const Wavefunction& Runner::ground_state(double A) {
  const long long key = std::llround(A * 1e12);
  auto it = ground_cache_.find(key);
  if (it != ground_cache_.end()) return it->second;
  Wavefunction psi = solver_.ground_state(pot_, p_.g_perp, A);
  return ground_cache_.emplace(key, std::move(psi)).first->second;
}

Wavefunction Runner::initial_state(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind == ExperimentKind::kOffset) {
    Wavefunction psi = solver_.displaced(ground_state(spec.A_end), spec.offset_x);
    psi.normalize();
    return psi;
  }
  return ground_state(spec.A_start);
}

HoldSeries Runner::hold_series(const ExperimentSpec& spec) {
  spec.validate();
  const ControlTrajectory u = build_control(spec, control_dt_);
  const Wavefunction psi0 = initial_state(spec);
  const int record_every = step_count(spec.sample_dt, control_dt_);
  const double t_ramp = spec.ramp_duration();
  const int hold_from = t_ramp == 0.0 ? 0 : step_count(t_ramp, control_dt_);
  const bool track_com = spec.kind == ExperimentKind::kOffset;

  const SpatialGrid& grid = solver_.grid();
  const std::vector<double> x = grid.x_values();
  std::vector<double> rho(grid.n);
  gpe::GaussianPairFit last_fit;
  bool have_fit = false;

  HoldSeries out;
  solver_.propagate(
      psi0, pot_, p_.g_perp, u, record_every,
      [&](int step, double t, const Wavefunction& psi) {
        if (step < hold_from) return;
        double value;
        if (track_com) {
          value = gpe::center_of_mass(psi);
        } else {
          active().density(psi.values.data(), rho.data(), rho.size());
          const gpe::GaussianPairFit fit = gpe::fit_gaussian_pair(
              x, rho, gpe::FitSpace::kPosition, have_fit ? &last_fit : nullptr);
          last_fit = fit;
          have_fit = true;
          value = fit.d;
        }
        out.times.push_back(t);
        out.values.push_back(value);
      });
  return out;
}

FrequencyMeasurement Runner::simulate(const ExperimentSpec& spec, int n_freq) {
  const HoldSeries series = hold_series(spec);
  FrequencyMeasurement m;
  m.experiment = spec;
  try {
    const auto peaks =
        gpe::extract_frequencies(series.values, spec.sample_dt, n_freq);
    m.frequencies.reserve(peaks.size());
    for (const auto& pk : peaks) m.frequencies.push_back(pk.omega);
  } catch (const NumericalError& err) {
    throw NumericalError("experiment " + spec.label() + ": " + err.what());
  }
  return m;
}

std::vector<double> Runner::candidate_frequencies(const ExperimentSpec& spec,
                                                  int max_peaks) {
  const HoldSeries series = hold_series(spec);
  try {
    const auto peaks =
        gpe::extract_peaks_up_to(series.values, spec.sample_dt, max_peaks);
    std::vector<double> out;
    out.reserve(peaks.size());
    for (const auto& pk : peaks) out.push_back(pk.omega);
    return out;
  } catch (const NumericalError& err) {
    throw NumericalError("experiment " + spec.label() + ": " + err.what());
  }
}

Wavefunction initial_state(const ExperimentSpec& spec,
                           const model::ModelParameters& p,
                           const SpatialGrid& grid, PhysicalConstants pc) {
  Runner runner(p, grid, pc);
  return runner.initial_state(spec);
}

FrequencyMeasurement simulate_experiment(const ExperimentSpec& spec,
                                         const model::ModelParameters& p,
                                         const SpatialGrid& grid, int n_freq,
                                         PhysicalConstants pc) {
  Runner runner(p, grid, pc);
  return runner.simulate(spec, n_freq);
}

FrequencyMeasurement add_measurement_noise(const FrequencyMeasurement& m,
                                           double q, std::uint64_t seed) {
  if (q < 0.0) throw ConfigError("noise variance must be non-negative");
  if (q == 0.0) return m;
  FrequencyMeasurement out = m;
  out.q = q;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(q));
  for (double& f : out.frequencies) f += gauss(rng);
  return out;
}

}  // namespace becsplit::experiments
