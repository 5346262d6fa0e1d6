#pragma once
// Discrete transforms matching the continuum convention
//   ghat(xi) = (2 pi)^{-1/2} \int e^{-i x xi} g(x) dx,
// realized on the lattice as ghat_k = dx/sqrt(2 pi) * (-1)^k * DFT_k, where the
// (-1)^k twist accounts for the x-offset -L. Round trip is exact; Parseval holds
// as sum |g|^2 dx = sum |ghat|^2 dxi.

#include "kinklab/field.hpp"

namespace kinklab {

SpectralField to_spectral(const RealField& f);
SpectralField to_spectral(const ComplexField& f);
RealField to_physical(const SpectralField& g, Parity p = Parity::none);  // real part
ComplexField to_physical_complex(const SpectralField& g);

// Coefficientwise product by symbol(xi_k). The Nyquist mode is zeroed after
// every multiplier application. Throws std::domain_error on non-finite symbol
// values at grid frequencies.
SpectralField apply_multiplier(const SpectralField& g,
                               const std::function<cplx(double)>& symbol);
void apply_multiplier_inplace(SpectralField& g, const std::vector<cplx>& table);
void apply_multiplier_inplace(SpectralField& g, const std::vector<double>& table);

// Precomputed symbol tables over the grid's frequencies, Nyquist entry zeroed.
std::vector<double> real_symbol_table(const Grid& g,
                                      const std::function<double(double)>& symbol);
std::vector<cplx> symbol_table(const Grid& g, const std::function<cplx(double)>& symbol);

// 0/1 mask keeping |xi| <= fraction * xi_max; Nyquist always zeroed.
std::vector<double> dealias_mask(const Grid& g, double fraction);

// Projects the coefficient array onto physical-space parity: f odd in x iff
// fhat(-xi) = -fhat(xi) (no conjugation; valid for complex fields too).
void spectral_parity_project(SpectralField& g, Parity parity);

double l2_norm_sq(const RealField& f);       // sum |f|^2 dx
double l2_norm_sq(const ComplexField& f);    // sum |f|^2 dx
double l2_norm_sq(const SpectralField& g);   // sum |ghat|^2 dxi

// Spectral derivative (multiplier i*xi); flips parity tag odd <-> even.
RealField spectral_derivative(const RealField& f);

} // namespace kinklab
