#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "becsplit/errors.hpp"
#include "becsplit/kernels.hpp"
#include "doctest.h"

using becsplit::kernels::avx2;
using becsplit::kernels::Backend;
using becsplit::kernels::cplx;
using becsplit::kernels::scalar;

namespace {

std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed,
                                 double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx(u(rng), u(rng));
  return v;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed,
                                double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Lengths that exercise full vector blocks, tails, and tiny arrays.
const std::size_t kLengths[] = {1, 2, 3, 5, 8, 17, 64, 513};

}  // namespace

TEST_CASE("backend dispatch reports a valid table") {
  CHECK(std::string(scalar().name) == "scalar");
  const auto& act = becsplit::kernels::active();
  CHECK((std::string(act.name) == "scalar" || std::string(act.name) == "avx2"));
  becsplit::kernels::force_backend("scalar");
  CHECK(becsplit::kernels::active_name() == "scalar");
  becsplit::kernels::force_backend("auto");
  CHECK_THROWS_AS(becsplit::kernels::force_backend("sse9"),
                  becsplit::ConfigError);
}

TEST_CASE("scalar kernels match direct formulas") {
  const std::size_t n = 33;
  auto a = random_complex(n, 11);
  auto b = random_complex(n, 12);
  auto w = random_real(n, 13, -2.0, 2.0);

  double expect = 0.0;
  for (std::size_t i = 0; i < n; ++i) expect += std::norm(a[i]);
  CHECK(scalar().sum_density(a.data(), n) == doctest::Approx(expect).epsilon(1e-14));

  expect = 0.0;
  for (std::size_t i = 0; i < n; ++i) expect += w[i] * std::norm(a[i]);
  CHECK(scalar().weighted_density_sum(a.data(), w.data(), n) ==
        doctest::Approx(expect).epsilon(1e-14));

  expect = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    expect += w[i] * (std::conj(a[i]) * b[i]).real();
  CHECK(scalar().weighted_inner_re(a.data(), b.data(), w.data(), n) ==
        doctest::Approx(expect).epsilon(1e-13));

  // phase_apply is a pure rotation: norm of every element is preserved.
  auto c = a;
  scalar().phase_apply(c.data(), w.data(), 0.7, n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(c[i]) == doctest::Approx(std::abs(a[i])).epsilon(1e-12));
}

TEST_CASE("coupling kick reference matches an explicit midpoint integration") {
  // One element, hand-integrated.
  cplx psi(0.6, -0.3);
  cplx p0(0.2, 0.9);
  const double g = 6.28, dt = 1e-3;
  const cplx b = g * psi * psi;
  const cplx mi(0.0, -1.0);
  const cplx k1 = mi * b * std::conj(p0);
  const cplx pm = p0 + 0.5 * dt * k1;
  const cplx expect = p0 + dt * (mi * b * std::conj(pm));

  cplx p = p0;
  scalar().coupling_kick(&p, &psi, g, dt, 1);
  CHECK(std::abs(p - expect) < 1e-15);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const Backend* v = avx2();
  if (v == nullptr) {
    MESSAGE("AVX2 backend not available on this host; nothing to compare");
    return;
  }

  for (std::size_t n : kLengths) {
    CAPTURE(n);
    auto a0 = random_complex(n, 100 + n);
    auto b = random_complex(n, 200 + n);
    auto w = random_real(n, 300 + n, -3.0, 3.0);
    auto theta = random_real(n, 400 + n, -80.0, 80.0);
    auto V = random_real(n, 500 + n, -50.0, 4000.0);

    SUBCASE("cmul_inplace") {
      auto s = a0, x = a0;
      scalar().cmul_inplace(s.data(), b.data(), n);
      v->cmul_inplace(x.data(), b.data(), n);
      CHECK(max_abs_diff(s, x) < 1e-14);
    }
    SUBCASE("scale_inplace") {
      auto s = a0, x = a0;
      scalar().scale_inplace(s.data(), 0.37, n);
      v->scale_inplace(x.data(), 0.37, n);
      CHECK(max_abs_diff(s, x) == 0.0);
    }
    SUBCASE("density") {
      std::vector<double> ds(n), dx(n);
      scalar().density(a0.data(), ds.data(), n);
      v->density(a0.data(), dx.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(ds[i] == doctest::Approx(dx[i]).epsilon(1e-15));
    }
    SUBCASE("reductions") {
      CHECK(scalar().sum_density(a0.data(), n) ==
            doctest::Approx(v->sum_density(a0.data(), n)).epsilon(1e-13));
      CHECK(scalar().weighted_density_sum(a0.data(), w.data(), n) ==
            doctest::Approx(v->weighted_density_sum(a0.data(), w.data(), n))
                .epsilon(1e-12));
      CHECK(scalar().sum_density_sq(a0.data(), n) ==
            doctest::Approx(v->sum_density_sq(a0.data(), n)).epsilon(1e-13));
      CHECK(scalar().weighted_inner_re(a0.data(), b.data(), w.data(), n) ==
            doctest::Approx(v->weighted_inner_re(a0.data(), b.data(), w.data(), n))
                .epsilon(1e-11));
    }
    SUBCASE("phase_apply across quadrants") {
      auto s = a0, x = a0;
      scalar().phase_apply(s.data(), theta.data(), 1.3, n);
      v->phase_apply(x.data(), theta.data(), 1.3, n);
      CHECK(max_abs_diff(s, x) < 5e-14);
    }
    SUBCASE("nonlinear_phase") {
      auto s = a0, x = a0;
      scalar().nonlinear_phase(s.data(), V.data(), 6.28, 1e-3, n);
      v->nonlinear_phase(x.data(), V.data(), 6.28, 1e-3, n);
      CHECK(max_abs_diff(s, x) < 5e-14);
    }
    SUBCASE("nonlinear_decay") {
      auto s = a0, x = a0;
      scalar().nonlinear_decay(s.data(), V.data(), 6.28, 1e-3, n);
      v->nonlinear_decay(x.data(), V.data(), 6.28, 1e-3, n);
      CHECK(max_abs_diff(s, x) < 1e-13);
    }
    SUBCASE("quartic_potential") {
      auto xs = random_real(n, 600 + n, -4.0, 4.0);
      std::vector<double> Vs(n), Vx(n);
      scalar().quartic_potential(xs.data(), -55.25, 61.75, Vs.data(), n);
      v->quartic_potential(xs.data(), -55.25, 61.75, Vx.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(Vs[i] == doctest::Approx(Vx[i]).epsilon(1e-13));
    }
    SUBCASE("coupling_kick") {
      auto s = a0, x = a0;
      auto psi = random_complex(n, 700 + n);
      scalar().coupling_kick(s.data(), psi.data(), 6.28, 1e-3, n);
      v->coupling_kick(x.data(), psi.data(), 6.28, 1e-3, n);
      CHECK(max_abs_diff(s, x) < 1e-14);
    }
  }
}

namespace {

// Synthetic observation: pair model evaluated away from the probe parameters
// so residuals, J^T r and the off-diagonal J^T J entries are all well away
// from zero.
std::vector<double> pair_pos_data(const std::vector<double>& x, double a,
                                  double s, double d) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xp = x[i] - 0.5 * d, xm = x[i] + 0.5 * d;
    const double u = std::exp(-xp * xp / (2 * s * s)) +
                     std::exp(-xm * xm / (2 * s * s));
    y[i] = a * a * u * u;
  }
  return y;
}

std::vector<double> pair_mom_data(const std::vector<double>& k, double a,
                                  double s, double d) {
  std::vector<double> y(k.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    y[i] = 2 * a * a * s * s * std::exp(-s * s * k[i] * k[i]) *
           (1.0 + std::cos(d * k[i]));
  return y;
}

}  // namespace

TEST_CASE("pair misfit kernels: gradient agrees with cost differences") {
  const std::size_t n = 257;
  auto xs = random_real(n, 900, -6.0, 6.0);
  const double a = 0.8, s = 0.7, d = 2.6;

  for (int space = 0; space < 2; ++space) {
    CAPTURE(space);
    auto kernel = space == 0 ? scalar().pair_misfit_pos
                             : scalar().pair_misfit_mom;
    auto ys = space == 0 ? pair_pos_data(xs, 1.0, 0.55, 2.1)
                         : pair_mom_data(xs, 1.0, 0.55, 2.1);

    double jtj[9], jtr[3];
    const double cost =
        kernel(xs.data(), ys.data(), n, a, s, d, jtj, jtr);
    CHECK(cost > 0.0);

    // The cost-only path must produce the identical sum.
    CHECK(kernel(xs.data(), ys.data(), n, a, s, d, nullptr, nullptr) == cost);

    // J^T J is symmetric with positive diagonal.
    CHECK(jtj[1] == jtj[3]);
    CHECK(jtj[2] == jtj[6]);
    CHECK(jtj[5] == jtj[7]);
    CHECK(jtj[0] > 0.0);
    CHECK(jtj[4] > 0.0);
    CHECK(jtj[8] > 0.0);

    // d(cost)/dp = 2 (J^T r)_p, central differences on the cost-only path.
    const double p0[3] = {a, s, d};
    for (int j = 0; j < 3; ++j) {
      CAPTURE(j);
      const double h = 1e-6 * std::abs(p0[j]);
      double pp[3] = {a, s, d}, pm[3] = {a, s, d};
      pp[j] += h;
      pm[j] -= h;
      const double cp =
          kernel(xs.data(), ys.data(), n, pp[0], pp[1], pp[2], nullptr, nullptr);
      const double cm =
          kernel(xs.data(), ys.data(), n, pm[0], pm[1], pm[2], nullptr, nullptr);
      const double fd = (cp - cm) / (2 * h);
      CHECK(fd == doctest::Approx(2.0 * jtr[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("avx2 pair misfit kernels agree with the scalar reference") {
  const Backend* v = avx2();
  if (v == nullptr) {
    MESSAGE("AVX2 backend not available on this host; nothing to compare");
    return;
  }

  const double a = 0.9, s = 0.62, d = 2.4;
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    auto xs = random_real(n, 910 + n, -5.5, 5.5);
    auto noise = random_real(n, 920 + n, -0.05, 0.05);

    for (int space = 0; space < 2; ++space) {
      CAPTURE(space);
      auto ker_s = space == 0 ? scalar().pair_misfit_pos
                              : scalar().pair_misfit_mom;
      auto ker_v = space == 0 ? v->pair_misfit_pos : v->pair_misfit_mom;
      auto ys = space == 0 ? pair_pos_data(xs, 1.0, 0.5, 2.0)
                           : pair_mom_data(xs, 1.0, 0.5, 2.0);
      for (std::size_t i = 0; i < n; ++i) ys[i] += noise[i];

      double jtj_s[9], jtr_s[3], jtj_v[9], jtr_v[3];
      const double cost_s =
          ker_s(xs.data(), ys.data(), n, a, s, d, jtj_s, jtr_s);
      const double cost_v =
          ker_v(xs.data(), ys.data(), n, a, s, d, jtj_v, jtr_v);
      CHECK(cost_s == doctest::Approx(cost_v).epsilon(1e-11));
      for (int j = 0; j < 3; ++j)
        CHECK(jtr_s[j] ==
              doctest::Approx(jtr_v[j]).epsilon(1e-10).scale(1e-12));
      for (int j = 0; j < 9; ++j)
        CHECK(jtj_s[j] ==
              doctest::Approx(jtj_v[j]).epsilon(1e-10).scale(1e-12));

      // Cost-only path: same reduction order as the full pass.
      CHECK(ker_v(xs.data(), ys.data(), n, a, s, d, nullptr, nullptr) ==
            cost_v);
    }
  }
}

TEST_CASE("vector trig stays accurate over wide phase ranges") {
  const Backend* v = avx2();
  if (v == nullptr) return;

  // Exercise the Cody-Waite reduction with phases far beyond one period.
  const std::size_t n = 1024;
  auto theta = random_real(n, 42, -300.0, 300.0);
  std::vector<cplx> s(n, cplx(1.0, 0.0)), x(n, cplx(1.0, 0.0));
  scalar().phase_apply(s.data(), theta.data(), 1.0, n);
  v->phase_apply(x.data(), theta.data(), 1.0, n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(s[i] - x[i]) < 1e-13);

  // Decay factors against std::exp, physical argument range.
  auto V = random_real(n, 43, -30.0, 30000.0);
  std::vector<cplx> es(n, cplx(1.0, 0.0)), ex(n, cplx(1.0, 0.0));
  scalar().nonlinear_decay(es.data(), V.data(), 0.0, 1e-3, n);
  v->nonlinear_decay(ex.data(), V.data(), 0.0, 1e-3, n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(es[i].real() ==
          doctest::Approx(ex[i].real()).epsilon(1e-12).scale(1e-300));
}
