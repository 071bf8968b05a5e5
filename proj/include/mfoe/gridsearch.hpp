#pragma once

#include <functional>
#include <vector>

namespace mfoe {

struct GridSearchResult {
    double lambda = 0.0;
    double sigma = 0.0;
    double score = 0.0; // objective at the optimum (mean PSNR)
    std::vector<std::array<double, 3>> evaluations; // (lambda, sigma, score), in order
};

// Objective to maximize, e.g. mean validation PSNR at (lambda, sigma).
using GridObjective = std::function<double(double lambda, double sigma)>;

// Two-stage coarse-to-fine search: a logarithmic coarse x coarse grid over the
// given bounds, then a fine x fine grid spanning one coarse cell on each side
// of the incumbent. Ties break toward smaller lambda, then smaller sigma.
// With tune_sigma = false the sigma dimension collapses to sigma_min.
GridSearchResult grid_search(const GridObjective& score, double lambda_min, double lambda_max,
                             double sigma_min, double sigma_max, int coarse = 5, int fine = 5,
                             bool tune_sigma = true);

} // namespace mfoe
