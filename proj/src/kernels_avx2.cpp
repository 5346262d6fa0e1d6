// AVX2/FMA kernel variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not be entered unless runtime dispatch confirmed support.
#include "kinklab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <immintrin.h>

namespace kinklab::kern {

namespace avx2 {

static void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

static void mul_add(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                              _mm256_loadu_pd(acc + i)));
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

static void axpy(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

static void scale(double a, double* x, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

// Two complex doubles per 256-bit lane, layout [re0 im0 re1 im1].
static void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    __m256d b_re = _mm256_movedup_pd(vb);                  // [br0 br0 br1 br1]
    __m256d b_im = _mm256_permute_pd(vb, 0b1111);          // [bi0 bi0 bi1 bi1]
    __m256d a_sw = _mm256_permute_pd(va, 0b0101);          // [ai0 ar0 ai1 ar1]
    // (ar+i*ai)(br+i*bi) = (ar*br - ai*bi) + i(ar*bi + ai*br)
    __m256d t = _mm256_mul_pd(a_sw, b_im);                 // [ai*bi ar*bi ...]
    __m256d r = _mm256_fmaddsub_pd(va, b_re, t);           // [ar*br-ai*bi ai*br+ar*bi ...]
    _mm256_storeu_pd(po + 2 * i, r);
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

static void cmul_rs(const double* s, cplx* z, std::size_t n) {
  double* pz = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m128d vs = _mm_loadu_pd(s + i);
    __m256d vss = _mm256_permute4x64_pd(_mm256_castpd128_pd256(vs), 0b01010000); // [s0 s0 s1 s1]
    _mm256_storeu_pd(pz + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(pz + 2 * i), vss));
  }
  for (; i < n; ++i) z[i] *= s[i];
}

static void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* py = reinterpret_cast<double*>(y);
  __m256d a_re = _mm256_set1_pd(a.real());
  __m256d a_im = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vx = _mm256_loadu_pd(px + 2 * i);
    __m256d x_sw = _mm256_permute_pd(vx, 0b0101);
    __m256d prod = _mm256_fmaddsub_pd(vx, a_re, _mm256_mul_pd(x_sw, a_im));
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

static double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

static double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

static double sup_abs(const double* x, std::size_t n) {
  __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::abs(x[i]));
  return r;
}

static double sup_abs_c(const cplx* z, std::size_t n) {
  const double* pz = reinterpret_cast<const double*>(z);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(pz + 2 * i);
    __m256d sq = _mm256_mul_pd(v, v);
    __m256d sw = _mm256_permute_pd(sq, 0b0101);
    m = _mm256_max_pd(m, _mm256_add_pd(sq, sw)); // |z|^2 duplicated in both slots
  }
  double r2 = hmax(m);
  for (; i < n; ++i) r2 = std::max(r2, std::norm(z[i]));
  return std::sqrt(r2);
}

static double l2_sq(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

static double l2_sq_c(const cplx* z, std::size_t n) {
  return l2_sq(reinterpret_cast<const double*>(z), 2 * n);
}

static double wl2_sq_c(const double* w, const cplx* z, std::size_t n) {
  const double* pz = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(pz + 2 * i);
    __m128d vw = _mm_loadu_pd(w + i);
    __m256d ww = _mm256_permute4x64_pd(_mm256_castpd128_pd256(vw), 0b01010000);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), ww, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::norm(z[i]);
  return s;
}

static double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

static const Ops table = {mul,      mul_add,  axpy,   scale,   cmul,     cmul_rs, caxpy,
                          sup_abs,  sup_abs_c, l2_sq, l2_sq_c, wl2_sq_c, dot};

} // namespace avx2

const Ops& avx2_table() { return avx2::table; }

} // namespace kinklab::kern
