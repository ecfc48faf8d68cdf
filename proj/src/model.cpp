#include "becsplit/model.hpp"

#include <cmath>
#include <string>

#include "becsplit/errors.hpp"

namespace becsplit::model {

namespace {

void check_control(double A) {
  if (!(A >= 0.0 && A <= 1.0))
    throw ConfigError("control value out of range [0,1]: " + std::to_string(A));
}

}  // namespace

void ModelParameters::validate() const {
  if (!(kappa1 < 0.0)) throw ConfigError("model: kappa1 must be negative");
  if (!(kappa2 > 0.0)) throw ConfigError("model: kappa2 must be positive");
  if (!(c > 0.0)) throw ConfigError("model: c must be positive");
  if (!(A_s > 0.0 && A_s < 1.0)) throw ConfigError("model: A_s must lie in (0,1)");
  if (!(g_perp >= 0.0)) throw ConfigError("model: g_perp must be non-negative");
}

double coeff_a2(const ModelParameters& p, double A) {
  check_control(A);
  if (A <= p.A_s) return p.kappa1 / 2.0 * (A - p.A_s);
  return -p.kappa2 / 4.0 * (A - p.A_s);
}

double coeff_a4(const ModelParameters& p) {
  return p.kappa2 / (8.0 * p.c * p.c);
}

double eval_potential(const ModelParameters& p, double A, double x) {
  const double x2 = x * x;
  return coeff_a4(p) * x2 * x2 + coeff_a2(p, A) * x2;
}

double minima_position(const ModelParameters& p, double A) {
  check_control(A);
  if (A <= p.A_s) return 0.0;
  return p.c * std::sqrt(A - p.A_s);
}

double minima_curvature(const ModelParameters& p, double A) {
  check_control(A);
  if (A <= p.A_s) return p.kappa1 * (A - p.A_s);
  return p.kappa2 * (A - p.A_s);
}

double dV_dA(const ModelParameters& p, double A, double x) {
  check_control(A);
  const double slope = A < p.A_s ? p.kappa1 / 2.0 : -p.kappa2 / 4.0;
  return slope * x * x;
}

}  // namespace becsplit::model
