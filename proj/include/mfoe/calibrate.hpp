#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mfoe/regularizer.hpp"
#include "mfoe/solver.hpp"

namespace mfoe {

struct Patch {
    Image clean;
    double sigma_m = 0.0;       // per-patch noise level, drawn from U(0, 0.2)
    std::uint64_t noise_seed = 0;
    double noise_scale = 1.0;   // multiplies the noise amplitude (sigma_m stays
                                // the loss weight); 0 gives clean observations
};

// Seeded random patches (offsets and noise levels derived from the seed).
std::vector<Patch> extract_patches(const std::vector<Image>& images, int patch_size, int count,
                                   std::uint64_t seed);

// L = (1/M) sum_m sigma_m^{-1/2} ||x*_m - x_m||_1 where x*_m denoises
// x_m + sigma_m n_m (noise from the patch seed) at (lambda, sigma_m).
double denoising_loss(const MfoeModel& m, const std::vector<Patch>& patches, double lambda,
                      const SolveConfig& inner = SolveConfig::denoising_training());

struct CalibrateResult {
    MfoeModel model;   // lambda_default carries the calibrated lambda
    double loss = 0.0; // loss of the returned model (never above the input's)
    int evaluations = 0;
};

// Coordinate-wise golden-section search on log-scaled scalar knobs, at most
// `sweeps` passes and 12 loss evaluations per coordinate. Knobs: "lambda",
// "mu" (mu_table scale), "tau" (scale, re-repaired), "q_offdiag" (scale on
// off-diagonal Q entries, re-repaired). Candidates with non-finite loss are
// rejected; the result is never worse than the input model.
CalibrateResult calibrate(const MfoeModel& model, const std::vector<Patch>& patches,
                          const std::set<std::string>& parameters,
                          const SolveConfig& inner = SolveConfig::denoising_training(),
                          int sweeps = 3);

} // namespace mfoe
