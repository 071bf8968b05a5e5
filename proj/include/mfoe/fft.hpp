#pragma once

#include <complex>

namespace mfoe {

// Orthonormal (unitary) 2-D DFT on row-major complex data: both directions
// scale by 1/sqrt(rows*cols), so forward followed by inverse is the identity
// and Parseval holds exactly.
void fft2_ortho(std::complex<double>* data, int rows, int cols, bool inverse);

} // namespace mfoe
