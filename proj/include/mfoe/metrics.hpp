#pragma once

#include "mfoe/image.hpp"

namespace mfoe {

// PSNR with peak 1.0, capped at 200 dB when the MSE drops below 1e-20.
double psnr(const Image& x, const Image& ref);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// peak 1.0, averaged over the valid (fully covered) window positions.
double ssim(const Image& x, const Image& ref);

} // namespace mfoe
