#pragma once

// Radix-2 complex FFT on the full N^3 lattice, plus the bookkeeping between
// the independent-mode representation and full-lattice position fields.
//
// Conventions (matching mode_grid.hpp):
//   position samples  x_j = -L/2 + j h,  h = L/N,  j = 0..N-1 per axis
//   frequencies       k_n = 2 pi n / L,  n = j < N/2 ? j : j - N
//   f_hat(k) = h^3 sum_x f(x) e^{-i k.x},   f(x) = (1/L^3) sum_k f_hat(k) e^{+i k.x}

#include <complex>
#include <vector>

#include "fplab/mode_grid.hpp"
#include "fplab/random_fields.hpp"

namespace fplab {

// Full-lattice array of Fourier coefficients indexed by (j1*N + j2)*N + j3
// with the standard wrapped frequency layout.
using LatticeArray = std::vector<cplx>;

bool is_power_of_two(int n);

// In-place 1D FFTs along all three axes; sign = -1 for e^{-2pi i n j / N}.
void fft3_raw(LatticeArray& data, int N, int sign);

// f_hat(k_n) (full lattice, physical normalization) -> f(x_j).
void fourier_to_position(LatticeArray& data, int N, double L);
// f(x_j) -> f_hat(k_n).
void position_to_fourier(LatticeArray& data, int N, double L);

// Expand independent modes to the full lattice (conjugate fill at -k).
LatticeArray expand_modes(const std::vector<cplx>& modes, const ModeGrid& grid);
// Reduce a Hermitian full-lattice array back onto the independent modes.
std::vector<cplx> reduce_modes(const LatticeArray& full, const ModeGrid& grid);

}  // namespace fplab
