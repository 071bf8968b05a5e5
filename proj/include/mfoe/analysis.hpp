#pragma once

#include "mfoe/image.hpp"
#include "mfoe/potentials.hpp"
#include "mfoe/regularizer.hpp"

namespace mfoe {

struct SpectralReport {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    int iterations = 0;
    int image_size = 0;
};

// W^T W applied to a centered impulse on a large canvas, cropped to the full
// support (2*composite - 1 per axis). Zero-mean filters make it sum to zero.
Image impulse_response(const MfoeModel& m);

// Magnitude of the (unnormalized) DFT of the zero-padded impulse response.
Image frequency_response(const MfoeModel& m, int fft_size);

// Extreme singular values of W on images of the given size: power iteration
// on W^T W for sigma_max, then on (I - W^T W) for sigma_min (requires a
// spectrally normalized bank; sigma_min is read off as ||W v|| at the
// converged eigenvector, avoiding cancellation).
SpectralReport min_singular_value(const MfoeModel& m, int image_size = 64,
                                  double eig_tol = 1e-9, int max_iter = 5000);

// psi evaluated over a square grid in the first two coordinates (remaining
// coordinates zero); grid point (i, j) maps to x = (lo + j*step, lo + i*step).
Image export_potential_surface(const PotentialGroup& g, double lo, double hi, int samples);

} // namespace mfoe
