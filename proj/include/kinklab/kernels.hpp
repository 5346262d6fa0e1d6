#pragma once
// Data-parallel inner loops used by the spectral pipeline: pointwise products,
// axpy updates, complex multiplier application, and norm reductions.
// Scalar reference implementations always exist; on x86 an AVX2/FMA variant is
// selected at runtime when the CPU supports it, on ARM a NEON variant at build
// time. Reductions may reassociate, so cross-variant agreement is to rounding,
// not bitwise; the equivalence tests pin that tolerance.

#include <complex>
#include <cstddef>
#include <string_view>

namespace kinklab::kern {

using cplx = std::complex<double>;

struct Ops {
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*mul_add)(const double*, const double*, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*cmul)(const cplx*, const cplx*, cplx*, std::size_t);
  void (*cmul_rs)(const double*, cplx*, std::size_t);   // z[i] *= s[i], s real
  void (*caxpy)(cplx, const cplx*, cplx*, std::size_t); // y += a*x
  double (*sup_abs)(const double*, std::size_t);
  double (*sup_abs_c)(const cplx*, std::size_t);
  double (*l2_sq)(const double*, std::size_t);          // sum x_i^2
  double (*l2_sq_c)(const cplx*, std::size_t);          // sum |z_i|^2
  double (*wl2_sq_c)(const double*, const cplx*, std::size_t); // sum w_i |z_i|^2
  double (*dot)(const double*, const double*, std::size_t);
};

// Active implementation (runtime-dispatched once; honours KINKLAB_FORCE_SCALAR=1).
const Ops& ops();
// Scalar reference, always available, for equivalence testing.
const Ops& scalar_ops();
// "avx2", "neon", or "scalar".
std::string_view active_isa();

} // namespace kinklab::kern
