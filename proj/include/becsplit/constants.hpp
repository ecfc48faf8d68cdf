#pragma once

namespace becsplit {

// Unit system: lengths in um, times in ms, energies and potentials as angular
// frequencies in rad/ms. The only dimensional constant the dynamics needs is
// eta = hbar/m, which for 87Rb is
//   hbar / m = 1.054571817e-34 J s / (86.909180 u * 1.66053907e-27 kg/u)
//            = 7.30737e-10 m^2/s = 0.730737 um^2/ms.
inline constexpr double kRb87Eta = 0.730737;

struct PhysicalConstants {
  double eta = kRb87Eta;  // hbar/m in um^2/ms
};

}  // namespace becsplit
