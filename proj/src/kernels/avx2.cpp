#include <immintrin.h>

#include <cmath>

#include "becsplit/kernels.hpp"

// AVX2+FMA variants of the inner loops. This translation unit is compiled
// with -mavx2 -mfma; dispatch.cpp only hands out the table after checking
// cpuid, so nothing here runs on hosts without the instructions.
//
// sin/cos/exp use the classic Cephes double-precision reductions and
// minimax polynomials, which stay within a few ulps of libm over the
// argument ranges the solver produces.

namespace becsplit::kernels {
namespace {

constexpr int kNearest = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// [x0 y0 x1 y1] * [u0 v0 u1 v1] as two packed complex products.
inline __m256d cmul(__m256d a, __m256d b) {
  __m256d b_re = _mm256_movedup_pd(b);
  __m256d b_im = _mm256_permute_pd(b, 0xF);
  __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

// -i * z per packed complex: (re, im) -> (im, -re).
inline __m256d neg_i(__m256d z) {
  const __m256d flip = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);
  return _mm256_xor_pd(_mm256_permute_pd(z, 0x5), flip);
}

inline __m256d conj_pd(__m256d z) {
  const __m256d flip = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);
  return _mm256_xor_pd(z, flip);
}

// |z|^2 for four complex spread over two registers, result ordered
// [d0 d1 d2 d3].
inline __m256d density4(__m256d z01, __m256d z23) {
  __m256d sq01 = _mm256_mul_pd(z01, z01);
  __m256d sq23 = _mm256_mul_pd(z23, z23);
  __m256d h = _mm256_hadd_pd(sq01, sq23);  // [d0 d2 d1 d3]
  return _mm256_permute4x64_pd(h, _MM_SHUFFLE(3, 1, 2, 0));
}

// Spread [w0 w1 w2 w3] onto complex pair lanes: [w0 w0 w1 w1], [w2 w2 w3 w3].
inline void spread_pairs(__m256d w, __m256d* lo, __m256d* hi) {
  *lo = _mm256_permute4x64_pd(w, _MM_SHUFFLE(1, 1, 0, 0));
  *hi = _mm256_permute4x64_pd(w, _MM_SHUFFLE(3, 3, 2, 2));
}

// Cody-Waite quadrant reduction plus Cephes minimax polynomials.
inline void sincos4(__m256d x, __m256d* s_out, __m256d* c_out) {
  const __m256d two_over_pi = _mm256_set1_pd(0.63661977236758134308);
  // pi/2 split with zeroed low mantissa bits so j * dp_k stays exact
  // (the doubled Cephes pi/4 triple).
  const __m256d dp1 = _mm256_set1_pd(1.57079625129699707031);
  const __m256d dp2 = _mm256_set1_pd(7.54978941586159635336e-8);
  const __m256d dp3 = _mm256_set1_pd(5.39030285815811905290e-15);

  __m256d j = _mm256_round_pd(_mm256_mul_pd(x, two_over_pi), kNearest);
  __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(j));

  __m256d r = _mm256_fnmadd_pd(j, dp1, x);
  r = _mm256_fnmadd_pd(j, dp2, r);
  r = _mm256_fnmadd_pd(j, dp3, r);
  __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(1.58962301576546568060e-10);
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-2.50507477628578072866e-8));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(2.75573136213857245213e-6));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.98412698295895385996e-4));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(8.33333333332211858878e-3));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.66666666666666307295e-1));
  __m256d sinr = _mm256_fmadd_pd(_mm256_mul_pd(ps, z), r, r);

  __m256d pc = _mm256_set1_pd(-1.13585365213876817300e-11);
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.08757008419747316778e-9));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-2.75573141792967388112e-7));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.48015872888517179954e-5));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-1.38888888888730564116e-3));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(4.16666666666665929218e-2));
  __m256d cosr = _mm256_fmadd_pd(
      _mm256_mul_pd(pc, z), z,
      _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0)));

  // Quadrant fixup from the low two bits of q (two's complement makes the
  // negative cases come out right): odd quadrants swap sin/cos, bit1 flips
  // the sign of sin, bit0 xor bit1 flips the sign of cos.
  __m256i bit0 = _mm256_and_si256(q, _mm256_set1_epi64x(1));
  __m256i bit1 = _mm256_and_si256(q, _mm256_set1_epi64x(2));
  __m256d swap_m = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(bit0, _mm256_set1_epi64x(1)));
  __m256d sneg_m = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(bit1, _mm256_set1_epi64x(2)));
  __m256d cneg_m = _mm256_castsi256_pd(_mm256_cmpeq_epi64(
      _mm256_xor_si256(_mm256_slli_epi64(bit0, 1), bit1),
      _mm256_set1_epi64x(2)));

  __m256d s = _mm256_blendv_pd(sinr, cosr, swap_m);
  __m256d c = _mm256_blendv_pd(cosr, sinr, swap_m);
  const __m256d signbit = _mm256_set1_pd(-0.0);
  *s_out = _mm256_xor_pd(s, _mm256_and_pd(sneg_m, signbit));
  *c_out = _mm256_xor_pd(c, _mm256_and_pd(cneg_m, signbit));
}

// Cephes rational exp; arguments are clamped to +-709 so results far in the
// underflow region flush to zero instead of wrapping.
inline __m256d exp4(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-709.0)),
                    _mm256_set1_pd(709.0));
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  __m256d j = _mm256_round_pd(_mm256_mul_pd(x, log2e), kNearest);
  __m256d r = _mm256_fnmadd_pd(j, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(j, _mm256_set1_pd(1.42860682030941723212e-6), r);
  __m256d z = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(9.99999999999999999910e-1));
  __m256d px = _mm256_mul_pd(r, p);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.0));
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(q, px));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  __m256i j64 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(j));
  __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(j64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
}

void cmul_inplace(cplx* a, const cplx* b, std::size_t n) {
  auto* ap = reinterpret_cast<double*>(a);
  const auto* bp = reinterpret_cast<const double*>(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(ap + 2 * i);
    __m256d vb = _mm256_loadu_pd(bp + 2 * i);
    _mm256_storeu_pd(ap + 2 * i, cmul(va, vb));
  }
  for (; i < n; ++i) a[i] *= b[i];
}

void scale_inplace(cplx* a, double s, std::size_t n) {
  auto* ap = reinterpret_cast<double*>(a);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    _mm256_storeu_pd(ap + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(ap + 2 * i), vs));
  for (; i < n; ++i) a[i] *= s;
}

void density(const cplx* a, double* out, std::size_t n) {
  const auto* ap = reinterpret_cast<const double*>(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    _mm256_storeu_pd(out + i, density4(z01, z23));
  }
  for (; i < n; ++i) out[i] = std::norm(a[i]);
}

double sum_density(const cplx* a, std::size_t n) {
  const auto* ap = reinterpret_cast<const double*>(a);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(z01, z01, acc0);
    acc1 = _mm256_fmadd_pd(z23, z23, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::norm(a[i]);
  return s;
}

double weighted_density_sum(const cplx* a, const double* w, std::size_t n) {
  const auto* ap = reinterpret_cast<const double*>(a);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    __m256d wlo, whi;
    spread_pairs(_mm256_loadu_pd(w + i), &wlo, &whi);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(z01, z01), wlo, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(z23, z23), whi, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * std::norm(a[i]);
  return s;
}

double sum_density_sq(const cplx* a, std::size_t n) {
  const auto* ap = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d z = _mm256_loadu_pd(ap + 2 * i);
    __m256d sq = _mm256_mul_pd(z, z);
    __m256d d = _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
    acc = _mm256_fmadd_pd(d, d, acc);  // counts each |z|^4 twice
  }
  double s = 0.5 * hsum(acc);
  for (; i < n; ++i) {
    const double d = std::norm(a[i]);
    s += d * d;
  }
  return s;
}

double weighted_inner_re(const cplx* a, const cplx* b, const double* w,
                         std::size_t n) {
  const auto* ap = reinterpret_cast<const double*>(a);
  const auto* bp = reinterpret_cast<const double*>(b);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p01 = _mm256_mul_pd(_mm256_loadu_pd(ap + 2 * i),
                                _mm256_loadu_pd(bp + 2 * i));
    __m256d p23 = _mm256_mul_pd(_mm256_loadu_pd(ap + 2 * i + 4),
                                _mm256_loadu_pd(bp + 2 * i + 4));
    __m256d wlo, whi;
    spread_pairs(_mm256_loadu_pd(w + i), &wlo, &whi);
    acc0 = _mm256_fmadd_pd(p01, wlo, acc0);
    acc1 = _mm256_fmadd_pd(p23, whi, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i)
    s += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return s;
}

// Shared tail: rotate four packed complex by phases [t0 t1 t2 t3].
inline void rotate4(double* ap, std::size_t i, __m256d t, __m256d z01,
                    __m256d z23) {
  __m256d s4, c4;
  sincos4(t, &s4, &c4);
  __m256d lo = _mm256_unpacklo_pd(c4, s4);  // [c0 s0 c2 s2]
  __m256d hi = _mm256_unpackhi_pd(c4, s4);  // [c1 s1 c3 s3]
  __m256d ph01 = _mm256_permute2f128_pd(lo, hi, 0x20);
  __m256d ph23 = _mm256_permute2f128_pd(lo, hi, 0x31);
  _mm256_storeu_pd(ap + 2 * i, cmul(z01, ph01));
  _mm256_storeu_pd(ap + 2 * i + 4, cmul(z23, ph23));
}

void phase_apply(cplx* a, const double* theta, double s, std::size_t n) {
  auto* ap = reinterpret_cast<double*>(a);
  const __m256d ms = _mm256_set1_pd(-s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    rotate4(ap, i, _mm256_mul_pd(ms, _mm256_loadu_pd(theta + i)), z01, z23);
  }
  for (; i < n; ++i) {
    const double t = -s * theta[i];
    a[i] *= cplx(std::cos(t), std::sin(t));
  }
}

void nonlinear_phase(cplx* psi, const double* V, double g, double dt,
                     std::size_t n) {
  auto* ap = reinterpret_cast<double*>(psi);
  const __m256d mdt = _mm256_set1_pd(-dt);
  const __m256d vg = _mm256_set1_pd(g);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    __m256d d = density4(z01, z23);
    __m256d t = _mm256_mul_pd(
        mdt, _mm256_fmadd_pd(vg, d, _mm256_loadu_pd(V + i)));
    rotate4(ap, i, t, z01, z23);
  }
  for (; i < n; ++i) {
    const double t = -dt * (V[i] + g * std::norm(psi[i]));
    psi[i] *= cplx(std::cos(t), std::sin(t));
  }
}

void nonlinear_decay(cplx* psi, const double* V, double g, double dt,
                     std::size_t n) {
  auto* ap = reinterpret_cast<double*>(psi);
  const __m256d mdt = _mm256_set1_pd(-dt);
  const __m256d vg = _mm256_set1_pd(g);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z01 = _mm256_loadu_pd(ap + 2 * i);
    __m256d z23 = _mm256_loadu_pd(ap + 2 * i + 4);
    __m256d d = density4(z01, z23);
    __m256d f = exp4(_mm256_mul_pd(
        mdt, _mm256_fmadd_pd(vg, d, _mm256_loadu_pd(V + i))));
    __m256d flo, fhi;
    spread_pairs(f, &flo, &fhi);
    _mm256_storeu_pd(ap + 2 * i, _mm256_mul_pd(z01, flo));
    _mm256_storeu_pd(ap + 2 * i + 4, _mm256_mul_pd(z23, fhi));
  }
  for (; i < n; ++i)
    psi[i] *= std::exp(-dt * (V[i] + g * std::norm(psi[i])));
}

void quartic_potential(const double* x, double a2, double a4, double* V,
                       std::size_t n) {
  const __m256d va2 = _mm256_set1_pd(a2);
  const __m256d va4 = _mm256_set1_pd(a4);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d x2 = _mm256_mul_pd(xv, xv);
    _mm256_storeu_pd(V + i, _mm256_mul_pd(_mm256_fmadd_pd(va4, x2, va2), x2));
  }
  for (; i < n; ++i) {
    const double x2 = x[i] * x[i];
    V[i] = (a4 * x2 + a2) * x2;
  }
}

void coupling_kick(cplx* p, const cplx* psi, double g, double dt,
                   std::size_t n) {
  auto* pp = reinterpret_cast<double*>(p);
  const auto* sp = reinterpret_cast<const double*>(psi);
  const __m256d vg = _mm256_set1_pd(g);
  const __m256d half_dt = _mm256_set1_pd(0.5 * dt);
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vpsi = _mm256_loadu_pd(sp + 2 * i);
    __m256d b = _mm256_mul_pd(vg, cmul(vpsi, vpsi));
    __m256d vp = _mm256_loadu_pd(pp + 2 * i);
    __m256d k1 = neg_i(cmul(b, conj_pd(vp)));
    __m256d pm = _mm256_fmadd_pd(half_dt, k1, vp);
    __m256d k2 = neg_i(cmul(b, conj_pd(pm)));
    _mm256_storeu_pd(pp + 2 * i, _mm256_fmadd_pd(vdt, k2, vp));
  }
  const cplx mi(0.0, -1.0);
  for (; i < n; ++i) {
    const cplx b = g * psi[i] * psi[i];
    const cplx k1 = mi * b * std::conj(p[i]);
    const cplx pm = p[i] + 0.5 * dt * k1;
    p[i] += dt * (mi * b * std::conj(pm));
  }
}

// Shared tail/accumulator plumbing for the two pair-model kernels: six
// upper-triangle J^T J lanes, three J^T r lanes and the squared residual.
struct PairAccum {
  __m256d cost = _mm256_setzero_pd();
  __m256d jtr[3] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                    _mm256_setzero_pd()};
  __m256d jtj[6] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                    _mm256_setzero_pd(), _mm256_setzero_pd(),
                    _mm256_setzero_pd(), _mm256_setzero_pd()};

  inline void add(__m256d r, const __m256d J[3]) {
    cost = _mm256_fmadd_pd(r, r, cost);
    jtr[0] = _mm256_fmadd_pd(J[0], r, jtr[0]);
    jtr[1] = _mm256_fmadd_pd(J[1], r, jtr[1]);
    jtr[2] = _mm256_fmadd_pd(J[2], r, jtr[2]);
    jtj[0] = _mm256_fmadd_pd(J[0], J[0], jtj[0]);
    jtj[1] = _mm256_fmadd_pd(J[0], J[1], jtj[1]);
    jtj[2] = _mm256_fmadd_pd(J[0], J[2], jtj[2]);
    jtj[3] = _mm256_fmadd_pd(J[1], J[1], jtj[3]);
    jtj[4] = _mm256_fmadd_pd(J[1], J[2], jtj[4]);
    jtj[5] = _mm256_fmadd_pd(J[2], J[2], jtj[5]);
  }

  // Fold the lane sums plus scalar tail contributions into the outputs.
  inline double finish(double tail_cost, const double tail_jtj[9],
                       const double tail_jtr[3], double* out_jtj,
                       double* out_jtr) const {
    if (out_jtj != nullptr) {
      const double u01 = hsum(jtj[1]) + tail_jtj[1];
      const double u02 = hsum(jtj[2]) + tail_jtj[2];
      const double u12 = hsum(jtj[4]) + tail_jtj[5];
      out_jtj[0] = hsum(jtj[0]) + tail_jtj[0];
      out_jtj[4] = hsum(jtj[3]) + tail_jtj[4];
      out_jtj[8] = hsum(jtj[5]) + tail_jtj[8];
      out_jtj[1] = out_jtj[3] = u01;
      out_jtj[2] = out_jtj[6] = u02;
      out_jtj[5] = out_jtj[7] = u12;
      out_jtr[0] = hsum(jtr[0]) + tail_jtr[0];
      out_jtr[1] = hsum(jtr[1]) + tail_jtr[1];
      out_jtr[2] = hsum(jtr[2]) + tail_jtr[2];
    }
    return hsum(cost) + tail_cost;
  }
};

double pair_misfit_pos(const double* x, const double* y, std::size_t n,
                       double a, double s, double d, double* jtj,
                       double* jtr) {
  const double s2 = s * s;
  const double inv2s2 = 1.0 / (2.0 * s2);
  const __m256d half_d = _mm256_set1_pd(0.5 * d);
  const __m256d neg_inv2s2 = _mm256_set1_pd(-inv2s2);
  const __m256d a2 = _mm256_set1_pd(a * a);
  const __m256d two_a = _mm256_set1_pd(2.0 * a);
  const __m256d two_a2 = _mm256_set1_pd(2.0 * a * a);
  const __m256d inv_s3 = _mm256_set1_pd(1.0 / (s2 * s));
  const __m256d inv_2s2 = _mm256_set1_pd(inv2s2);
  const bool want_grad = jtj != nullptr;

  PairAccum acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d xp = _mm256_sub_pd(xv, half_d);
    const __m256d xm = _mm256_add_pd(xv, half_d);
    const __m256d gp = exp4(_mm256_mul_pd(_mm256_mul_pd(xp, xp), neg_inv2s2));
    const __m256d gm = exp4(_mm256_mul_pd(_mm256_mul_pd(xm, xm), neg_inv2s2));
    const __m256d u = _mm256_add_pd(gp, gm);
    const __m256d u2 = _mm256_mul_pd(u, u);
    const __m256d r =
        _mm256_fmsub_pd(a2, u2, _mm256_loadu_pd(y + i));
    if (want_grad) {
      __m256d J[3];
      J[0] = _mm256_mul_pd(two_a, u2);
      const __m256d wp = _mm256_mul_pd(gp, _mm256_mul_pd(xp, xp));
      const __m256d wm = _mm256_mul_pd(gm, _mm256_mul_pd(xm, xm));
      J[1] = _mm256_mul_pd(
          _mm256_mul_pd(two_a2, u),
          _mm256_mul_pd(_mm256_add_pd(wp, wm), inv_s3));
      const __m256d vp = _mm256_mul_pd(gp, xp);
      const __m256d vm = _mm256_mul_pd(gm, xm);
      J[2] = _mm256_mul_pd(
          _mm256_mul_pd(two_a2, u),
          _mm256_mul_pd(_mm256_sub_pd(vp, vm), inv_2s2));
      acc.add(r, J);
    } else {
      acc.cost = _mm256_fmadd_pd(r, r, acc.cost);
    }
  }

  double tail_jtj[9] = {0};
  double tail_jtr[3] = {0};
  const double tail_cost =
      scalar().pair_misfit_pos(x + i, y + i, n - i, a, s, d,
                               want_grad ? tail_jtj : nullptr,
                               want_grad ? tail_jtr : nullptr);
  return acc.finish(tail_cost, tail_jtj, tail_jtr, jtj, jtr);
}

double pair_misfit_mom(const double* x, const double* y, std::size_t n,
                       double a, double s, double d, double* jtj,
                       double* jtr) {
  const double s2 = s * s;
  const __m256d neg_s2 = _mm256_set1_pd(-s2);
  const __m256d amp = _mm256_set1_pd(2.0 * a * a * s2);
  const __m256d dv = _mm256_set1_pd(d);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d inv_a_2 = _mm256_set1_pd(2.0 / a);
  const __m256d two_over_s = _mm256_set1_pd(2.0 / s);
  const __m256d two_s = _mm256_set1_pd(2.0 * s);
  const bool want_grad = jtj != nullptr;

  PairAccum acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d kv = _mm256_loadu_pd(x + i);
    const __m256d k2 = _mm256_mul_pd(kv, kv);
    const __m256d env = exp4(_mm256_mul_pd(neg_s2, k2));
    __m256d sn, cs;
    sincos4(_mm256_mul_pd(dv, kv), &sn, &cs);
    const __m256d m =
        _mm256_mul_pd(amp, _mm256_mul_pd(env, _mm256_add_pd(one, cs)));
    const __m256d r = _mm256_sub_pd(m, _mm256_loadu_pd(y + i));
    if (want_grad) {
      __m256d J[3];
      J[0] = _mm256_mul_pd(m, inv_a_2);
      J[1] = _mm256_mul_pd(
          m, _mm256_fnmadd_pd(two_s, k2, two_over_s));
      J[2] = _mm256_mul_pd(
          _mm256_sub_pd(_mm256_setzero_pd(), amp),
          _mm256_mul_pd(env, _mm256_mul_pd(kv, sn)));
      acc.add(r, J);
    } else {
      acc.cost = _mm256_fmadd_pd(r, r, acc.cost);
    }
  }

  double tail_jtj[9] = {0};
  double tail_jtr[3] = {0};
  const double tail_cost =
      scalar().pair_misfit_mom(x + i, y + i, n - i, a, s, d,
                               want_grad ? tail_jtj : nullptr,
                               want_grad ? tail_jtr : nullptr);
  return acc.finish(tail_cost, tail_jtj, tail_jtr, jtj, jtr);
}

}  // namespace

const Backend* avx2_table() {
  static const Backend table{
      "avx2",          cmul_inplace,    scale_inplace, density,
      sum_density,     weighted_density_sum, sum_density_sq, weighted_inner_re,
      phase_apply,     nonlinear_phase, nonlinear_decay, quartic_potential,
      coupling_kick,   pair_misfit_pos, pair_misfit_mom,
  };
  return &table;
}

}  // namespace becsplit::kernels
