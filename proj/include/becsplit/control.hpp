#pragma once

#include <vector>

namespace becsplit {

// Control trajectory A(t) sampled uniformly on [0, T]: samples.size() equals
// T/dt + 1 and every value lies in [0, 1]. The solver reads the control at
// step midpoints, i.e. the average of two adjacent samples.
struct ControlTrajectory {
  double dt = 1e-3;
  std::vector<double> samples;

  int steps() const { return static_cast<int>(samples.size()) - 1; }
  double duration() const { return dt * steps(); }
  double midpoint(int step) const {
    return 0.5 * (samples[step] + samples[step + 1]);
  }

  // Throws ConfigError on empty samples, non-positive dt or values
  // outside [0, 1].
  void validate() const;
};

ControlTrajectory linear_ramp(double A0, double A1, double T, double dt);
ControlTrajectory constant_control(double A, double T, double dt);

// Join two trajectories; b's first sample must match a's last one and both
// must share dt.
ControlTrajectory concat(const ControlTrajectory& a, const ControlTrajectory& b);

// Number of steps T/dt, which must be integral to ~1e-9 relative.
int step_count(double T, double dt);

}  // namespace becsplit
