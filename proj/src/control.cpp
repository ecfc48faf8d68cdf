#include "becsplit/control.hpp"

#include <cmath>
#include <string>

#include "becsplit/errors.hpp"

namespace becsplit {

void ControlTrajectory::validate() const {
  if (!(dt > 0.0)) throw ConfigError("control: dt must be positive");
  if (samples.size() < 2)
    throw ConfigError("control: needs at least two samples");
  for (double a : samples)
    if (!(a >= 0.0 && a <= 1.0))
      throw ConfigError("control: sample out of range [0,1]: " +
                        std::to_string(a));
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0))
    throw ConfigError("control: durations and dt must be positive");
  const double ratio = T / dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
    throw ConfigError("control: duration " + std::to_string(T) +
                      " is not an integral multiple of dt " +
                      std::to_string(dt));
  return static_cast<int>(n);
}

ControlTrajectory linear_ramp(double A0, double A1, double T, double dt) {
  const int n = step_count(T, dt);
  ControlTrajectory u;
  u.dt = dt;
  u.samples.resize(n + 1);
  for (int i = 0; i <= n; ++i)
    u.samples[i] = A0 + (A1 - A0) * (static_cast<double>(i) / n);
  u.samples.back() = A1;
  u.validate();
  return u;
}

ControlTrajectory constant_control(double A, double T, double dt) {
  const int n = step_count(T, dt);
  ControlTrajectory u;
  u.dt = dt;
  u.samples.assign(n + 1, A);
  u.validate();
  return u;
}

ControlTrajectory concat(const ControlTrajectory& a, const ControlTrajectory& b) {
  if (std::abs(a.dt - b.dt) > 1e-15)
    throw ConfigError("control: cannot concatenate trajectories with different dt");
  if (std::abs(a.samples.back() - b.samples.front()) > 1e-12)
    throw ConfigError("control: concatenation requires matching boundary values");
  ControlTrajectory out = a;
  out.samples.insert(out.samples.end(), b.samples.begin() + 1, b.samples.end());
  return out;
}

}  // namespace becsplit
