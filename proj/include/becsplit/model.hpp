#pragma once

#include <array>

namespace becsplit::model {

// Five-parameter description of the transversal trapping potential
//   V(x, A) = a4 x^4 + a2(A) x^2
// with a piecewise-linear quadratic coefficient that changes sign at the
// splitting value A_s, plus the effective 1D interaction strength. Units:
// potentials in rad/ms, x in um, A dimensionless in [0, 1].
struct ModelParameters {
  double kappa1;  // curvature slope below the split, < 0 (rad/ms/um^2)
  double kappa2;  // curvature slope above the split, > 0 (rad/ms/um^2)
  double c;       // minima position scale, > 0 (um)
  double A_s;     // splitting value of the control, in (0, 1)
  double g_perp;  // interaction strength, >= 0 (rad/ms um)

  // Throws ConfigError when any sign or range constraint is violated.
  void validate() const;

  bool operator==(const ModelParameters&) const = default;
};

// Nominal parameter set used as the synthetic ground truth and as the start
// of calibration studies.
inline constexpr ModelParameters kNominalParams{-1495.0, 2210.0, 2.115, 0.4, 6.28};

// Canonical parameter-vector order shared by sensitivity and calibration
// code: (kappa1, kappa2, c, A_s, g_perp).
inline constexpr int kParamCount = 5;
inline constexpr const char* kParamNames[kParamCount] = {"kappa1", "kappa2",
                                                         "c", "A_s", "g_perp"};

inline std::array<double, kParamCount> to_array(const ModelParameters& p) {
  return {p.kappa1, p.kappa2, p.c, p.A_s, p.g_perp};
}

inline ModelParameters from_array(const std::array<double, kParamCount>& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

// Quadratic coefficient a2(A): kappa1/2 (A - A_s) below the split,
// -kappa2/4 (A - A_s) above; both branches vanish at A = A_s.
double coeff_a2(const ModelParameters& p, double A);

// Quartic coefficient a4 = kappa2 / (8 c^2), independent of A.
double coeff_a4(const ModelParameters& p);

double eval_potential(const ModelParameters& p, double A, double x);

// Position of the (non-negative) potential minimum: 0 below the split,
// c sqrt(A - A_s) above.
double minima_position(const ModelParameters& p, double A);

// Curvature V'' at the minimum: kappa1 (A - A_s) below the split,
// kappa2 (A - A_s) above. Continuous (both branches vanish) at A = A_s.
double minima_curvature(const ModelParameters& p, double A);

// Partial derivative of V with respect to the control, x^2 da2/dA.
// da2/dA jumps at A_s; the A > A_s branch is used there (right-continuous).
double dV_dA(const ModelParameters& p, double A, double x);

// Quartic coefficients of an even potential a4 x^4 + a2 x^2, the shape every
// potential in this project takes.
struct QuarticCoeffs {
  double a2 = 0.0;
  double a4 = 0.0;
};

// Control-dependent potential shape. The solver only ever needs the quartic
// coefficients at a control value and, for control gradients, da2/dA.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual QuarticCoeffs coeffs(double A) const = 0;
  virtual double da2_dA(double A) const = 0;
};

// The five-parameter trap model above.
class TrapPotential final : public PotentialModel {
 public:
  explicit TrapPotential(const ModelParameters& p) : p_(p) {}
  QuarticCoeffs coeffs(double A) const override {
    return {coeff_a2(p_, A), coeff_a4(p_)};
  }
  // Right-continuous at A = A_s, matching dV_dA.
  double da2_dA(double A) const override {
    return A < p_.A_s ? p_.kappa1 / 2.0 : -p_.kappa2 / 4.0;
  }
  const ModelParameters& params() const { return p_; }

 private:
  ModelParameters p_;
};

// Fixed coefficients, ignoring the control; handy for oracle tests against
// closed-form harmonic results.
class FixedQuartic final : public PotentialModel {
 public:
  explicit FixedQuartic(QuarticCoeffs c) : c_(c) {}
  QuarticCoeffs coeffs(double) const override { return c_; }
  double da2_dA(double) const override { return 0.0; }

 private:
  QuarticCoeffs c_;
};

}  // namespace becsplit::model
