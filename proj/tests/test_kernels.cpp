// Equivalence of the dispatched kernel table against the scalar reference.
// FMA contraction and reassociated reductions shift results by a few ulp, so
// comparisons are relative with headroom rather than bitwise.
#include <doctest.h>

#include <complex>
#include <cstdlib>
#include <random>
#include <vector>

#include "kinklab/kernels.hpp"

using kinklab::kern::cplx;

namespace {

struct RandomData {
  std::vector<double> a, b, c, w;
  std::vector<cplx> za, zb, zc;
  explicit RandomData(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    a.resize(n);
    b.resize(n);
    c.resize(n);
    w.resize(n);
    za.resize(n);
    zb.resize(n);
    zc.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      c[i] = u(rng);
      w[i] = std::abs(u(rng)) + 0.1;
      za[i] = {u(rng), u(rng)};
      zb[i] = {u(rng), u(rng)};
      zc[i] = {u(rng), u(rng)};
    }
  }
};

constexpr double kRelTol = 1e-13;

double rel_err(double got, double want) {
  double denom = std::max(1.0, std::abs(want));
  return std::abs(got - want) / denom;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("dispatched table matches scalar reference on random data") {
  const auto& d = kinklab::kern::ops();
  const auto& s = kinklab::kern::scalar_ops();
  INFO("active isa: " << kinklab::kern::active_isa());

  // Sizes straddle vector widths, including remainders and tiny arrays.
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{7},
                        std::size_t{64}, std::size_t{1021}}) {
    RandomData rd(n, 1234 + static_cast<unsigned>(n));

    SUBCASE("mul") {}
    {
      std::vector<double> o1(n), o2(n);
      d.mul(rd.a.data(), rd.b.data(), o1.data(), n);
      s.mul(rd.a.data(), rd.b.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(kRelTol));
    }
    {
      std::vector<double> o1 = rd.c, o2 = rd.c;
      d.mul_add(rd.a.data(), rd.b.data(), o1.data(), n);
      s.mul_add(rd.a.data(), rd.b.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(o1[i], o2[i]) < kRelTol);
    }
    {
      std::vector<double> y1 = rd.b, y2 = rd.b;
      d.axpy(0.7, rd.a.data(), y1.data(), n);
      s.axpy(0.7, rd.a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y1[i], y2[i]) < kRelTol);
    }
    {
      std::vector<double> x1 = rd.a, x2 = rd.a;
      d.scale(-1.3, x1.data(), n);
      s.scale(-1.3, x2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(x1[i] == x2[i]); // pure multiply, no FMA
    }
    {
      std::vector<cplx> o1(n), o2(n);
      d.cmul(rd.za.data(), rd.zb.data(), o1.data(), n);
      s.cmul(rd.za.data(), rd.zb.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(rel_err(o1[i].real(), o2[i].real()) < kRelTol);
        CHECK(rel_err(o1[i].imag(), o2[i].imag()) < kRelTol);
      }
    }
    {
      std::vector<cplx> z1 = rd.za, z2 = rd.za;
      d.cmul_rs(rd.w.data(), z1.data(), n);
      s.cmul_rs(rd.w.data(), z2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(z1[i] == z2[i]);
    }
    {
      std::vector<cplx> y1 = rd.zb, y2 = rd.zb;
      cplx alpha{0.4, -1.1};
      d.caxpy(alpha, rd.za.data(), y1.data(), n);
      s.caxpy(alpha, rd.za.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(rel_err(y1[i].real(), y2[i].real()) < kRelTol);
        CHECK(rel_err(y1[i].imag(), y2[i].imag()) < kRelTol);
      }
    }
    CHECK(rel_err(d.sup_abs(rd.a.data(), n), s.sup_abs(rd.a.data(), n)) < kRelTol);
    CHECK(rel_err(d.sup_abs_c(rd.za.data(), n), s.sup_abs_c(rd.za.data(), n)) < kRelTol);
    CHECK(rel_err(d.l2_sq(rd.a.data(), n), s.l2_sq(rd.a.data(), n)) < kRelTol);
    CHECK(rel_err(d.l2_sq_c(rd.za.data(), n), s.l2_sq_c(rd.za.data(), n)) < kRelTol);
    CHECK(rel_err(d.wl2_sq_c(rd.w.data(), rd.za.data(), n),
                  s.wl2_sq_c(rd.w.data(), rd.za.data(), n)) < kRelTol);
    CHECK(rel_err(d.dot(rd.a.data(), rd.b.data(), n), s.dot(rd.a.data(), rd.b.data(), n)) <
          kRelTol);
  }
}

TEST_CASE("scalar table basic identities") {
  // Direct checks so scalar reference stands on its own, not just by agreement.
  const auto& s = kinklab::kern::scalar_ops();
  double a[3] = {1.0, -2.0, 3.0};
  double b[3] = {4.0, 5.0, -6.0};
  double o[3];
  s.mul(a, b, o, 3);
  CHECK(o[0] == 4.0);
  CHECK(o[1] == -10.0);
  CHECK(o[2] == -18.0);
  CHECK(s.dot(a, b, 3) == -24.0);
  CHECK(s.l2_sq(a, 3) == 14.0);
  CHECK(s.sup_abs(a, 3) == 3.0);

  cplx za[2] = {{1.0, 2.0}, {0.0, -1.0}};
  cplx zb[2] = {{3.0, -1.0}, {2.0, 2.0}};
  cplx zo[2];
  s.cmul(za, zb, zo, 2);
  CHECK(zo[0] == cplx{5.0, 5.0});
  CHECK(zo[1] == cplx{2.0, -2.0});
  CHECK(s.l2_sq_c(za, 2) == 6.0);
  CHECK(s.sup_abs_c(za, 2) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("force-scalar env var is honoured at first dispatch") {
  // Dispatch is latched by std::once_flag, so this documents rather than toggles:
  // when KINKLAB_FORCE_SCALAR=1 was set before first use, active_isa() is "scalar".
  const char* force = std::getenv("KINKLAB_FORCE_SCALAR");
  if (force && force[0] == '1') {
    CHECK(kinklab::kern::active_isa() == "scalar");
  } else {
    CHECK((kinklab::kern::active_isa() == "avx2" || kinklab::kern::active_isa() == "neon" ||
           kinklab::kern::active_isa() == "scalar"));
  }
}

} // TEST_SUITE
