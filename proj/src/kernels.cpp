#include "kinklab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

namespace kinklab::kern {

namespace scalar {

static void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
static void mul_add(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}
static void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
static void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}
static void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
static void cmul_rs(const double* s, cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= s[i];
}
static void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
static double sup_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}
static double sup_abs_c(const cplx* z, std::size_t n) {
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m2 = std::max(m2, std::norm(z[i]));
  return std::sqrt(m2);
}
static double l2_sq(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}
static double l2_sq_c(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(z[i]);
  return s;
}
static double wl2_sq_c(const double* w, const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(z[i]);
  return s;
}
static double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

static const Ops table = {mul,      mul_add, axpy,   scale,  cmul,    cmul_rs, caxpy,
                          sup_abs,  sup_abs_c, l2_sq, l2_sq_c, wl2_sq_c, dot};

} // namespace scalar

#if defined(KINKLAB_HAVE_AVX2_TU)
// Defined in kernels_avx2.cpp (compiled with -mavx2 -mfma).
const Ops& avx2_table();
#endif

#if defined(__ARM_NEON)
namespace neon {
#include <arm_neon.h>

static void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}
static void mul_add(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}
static void axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}
static void scale(double a, double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

static const Ops table = {mul,
                          mul_add,
                          axpy,
                          scale,
                          scalar::cmul,
                          scalar::cmul_rs,
                          scalar::caxpy,
                          scalar::sup_abs,
                          scalar::sup_abs_c,
                          scalar::l2_sq,
                          scalar::l2_sq_c,
                          scalar::wl2_sq_c,
                          scalar::dot};

} // namespace neon
#endif

static const Ops* pick() {
  if (const char* e = std::getenv("KINKLAB_FORCE_SCALAR"); e && e[0] == '1')
    return &scalar::table;
#if defined(KINKLAB_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &avx2_table();
#endif
#if defined(__ARM_NEON)
  return &neon::table;
#endif
  return &scalar::table;
}

static std::once_flag g_once;
static const Ops* g_active = nullptr;

const Ops& ops() {
  std::call_once(g_once, [] { g_active = pick(); });
  return *g_active;
}

const Ops& scalar_ops() { return scalar::table; }

std::string_view active_isa() {
  const Ops* o = &ops();
  if (o == &scalar::table) return "scalar";
#if defined(KINKLAB_HAVE_AVX2_TU)
  if (o == &avx2_table()) return "avx2";
#endif
  return "neon";
}

} // namespace kinklab::kern
