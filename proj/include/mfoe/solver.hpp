#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mfoe/image.hpp"
#include "mfoe/regularizer.hpp"

namespace mfoe {

struct SolveConfig {
    double tolerance = 1e-5; // relative-change stop
    int max_iterations = 1000;
    double step = 0.0; // <= 0 selects the caller's automatic step size

    // defaults used for image reconstruction and for denoising inside
    // training/calibration loops
    static SolveConfig reconstruction() { return {1e-5, 1000, 0.0}; }
    static SolveConfig denoising_training() { return {1e-4, 300, 0.0}; }
};

struct SolveReport {
    int iterations = 0;
    int restarts = 0;
    double final_relative_change = 0.0;
    std::vector<double> objective_trace; // one f(z_k) value per iteration
};

// Fused objective: fills the gradient at x and returns the value.
using Objective = std::function<double(const Image& x, Image& grad)>;

// Accelerated gradient descent with restart on objective increase:
//   x_{k+1} = z_k - gamma grad f(z_k)
//   t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2
//   z_{k+1} = x_{k+1} + ((t_k - 1)/t_{k+1})(x_{k+1} - x_k)
//   restart (z <- x, t <- 1) whenever f(z_k) increased
// Stops when r = ||x_{k+1} - x_k||/||x_{k+1}|| <= tolerance or the iteration
// budget is exhausted. Throws NumericError with the iterate index if the
// objective or gradient turns non-finite.
std::pair<Image, SolveReport> solve(const Objective& f, const Image& x0, double gamma,
                                    const SolveConfig& cfg);

// Denoising: minimize 0.5||x - y||^2 + lambda R_sigma(x) from x0 = y with
// gamma = 1/(1 + lambda).
std::pair<Image, SolveReport> denoise(const MfoeModel& m, const Image& y, double lambda,
                                      double sigma, const SolveConfig& cfg);

} // namespace mfoe
