#pragma once
// Core lattice and field containers: a periodic grid on [-L, L) with N samples,
// plus real/complex sample arrays and spectral coefficient arrays living on it.

#include <complex>
#include <functional>
#include <vector>

namespace kinklab {

using cplx = std::complex<double>;

enum class Parity { odd, even, none };

struct Grid {
  int n = 0;               // sample count, even
  double half_length = 0;  // L; domain [-L, L)
  double dx = 0;           // 2L/N
  double dxi = 0;          // pi/L
  std::vector<double> x;   // x_j = -L + j*dx; x[n/2] == 0 exactly
  std::vector<double> xi;  // xi_k = pi*k/L in FFT order [0..N/2-1, -N/2..-1]

  int origin() const { return n / 2; }   // index of x = 0
  int nyquist() const { return n / 2; }  // index of the Nyquist mode in xi
  // Lattice reflection x_j -> -x_j (periodic: j = 0 maps to itself).
  std::size_t rev(std::size_t j) const {
    return j == 0 ? 0 : static_cast<std::size_t>(n) - j;
  }
  double xi_max() const { return dxi * (n / 2); }
};

// Throws std::invalid_argument on odd/too-small N, FFT-unfriendly N, or L <= 0.
Grid make_grid(int n_points, double half_length);

struct RealField {
  const Grid* grid = nullptr;
  std::vector<double> values;
  Parity parity = Parity::none;
};

struct ComplexField {
  const Grid* grid = nullptr;
  std::vector<cplx> values;
};

struct SpectralField {
  const Grid* grid = nullptr;
  std::vector<cplx> coefficients;
};

RealField make_real_field(const Grid& g, Parity p = Parity::none);
ComplexField make_complex_field(const Grid& g);
SpectralField make_spectral_field(const Grid& g);

// Samples f over the grid. The parity tag is recorded, not enforced.
RealField sample_field(const Grid& g, const std::function<double(double)>& f,
                       Parity p = Parity::none);

// (f(x) - f(-x))/2 resp. (f(x) + f(-x))/2 via the lattice reflection. The j = 0
// sample (x = -L) reflects onto itself, so odd projection zeroes it; this is the
// periodic wrap point and is where non-periodic samples (tanh) get clipped.
// Parity::none returns the field unchanged.
RealField parity_project(const RealField& f, Parity parity);
void parity_project_inplace(RealField& f, Parity parity);
void parity_project_inplace(ComplexField& f, Parity parity);

// sup-norm of the component violating the requested parity.
double parity_error(const RealField& f, Parity parity);
double parity_error(const ComplexField& f, Parity parity);

} // namespace kinklab
