#include "mfoe/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mfoe/errors.hpp"

namespace mfoe {

std::pair<Image, SolveReport> solve(const Objective& f, const Image& x0, double gamma,
                                    const SolveConfig& cfg) {
    if (!(cfg.tolerance > 0.0)) throw ConfigError("solve: tolerance must be positive");
    if (cfg.max_iterations < 1) throw ConfigError("solve: max_iterations must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("solve: step size must be positive and finite");

    SolveReport report;
    Image x = x0;
    Image z = x0;
    Image x_new(x0.rows, x0.cols);
    Image grad(x0.rows, x0.cols);

    double t = 1.0;
    double f_prev = std::numeric_limits<double>::infinity();
    double r = std::numeric_limits<double>::infinity();
    int k = 0;

    while (r > cfg.tolerance && k <= cfg.max_iterations) {
        const double f_z = f(z, grad);
        if (!std::isfinite(f_z) || !grad.all_finite())
            throw NumericError("solve: non-finite objective or gradient at iteration " +
                               std::to_string(k));

        for (std::size_t i = 0; i < x.data.size(); ++i)
            x_new.data[i] = z.data[i] - gamma * grad.data[i];

        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_new;

        double diff2 = 0.0, xn2 = 0.0;
        if (f_z > f_prev) {
            // restart: drop the momentum
            ++report.restarts;
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                const double d = x_new.data[i] - x.data[i];
                diff2 += d * d;
                xn2 += x_new.data[i] * x_new.data[i];
                z.data[i] = x_new.data[i];
            }
            t = 1.0;
        } else {
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                const double d = x_new.data[i] - x.data[i];
                diff2 += d * d;
                xn2 += x_new.data[i] * x_new.data[i];
                z.data[i] = x_new.data[i] + beta * d;
            }
            t = t_new;
        }

        r = diff2 == 0.0 && xn2 == 0.0 ? 0.0 : std::sqrt(diff2) / std::sqrt(xn2);
        report.objective_trace.push_back(f_z);
        f_prev = f_z;
        x.data = x_new.data;
        ++k;
    }

    report.iterations = k;
    report.final_relative_change = r;
    return {std::move(x), std::move(report)};
}

std::pair<Image, SolveReport> denoise(const MfoeModel& m, const Image& y, double lambda,
                                      double sigma, const SolveConfig& cfg) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw ConfigError("denoise: lambda must be nonnegative and finite");
    const double gamma = cfg.step > 0.0 ? cfg.step : 1.0 / (1.0 + lambda);

    Objective f;
    if (lambda == 0.0) {
        f = [&y](const Image& x, Image& grad) {
            grad = Image(x.rows, x.cols);
            double v = 0.0;
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                const double d = x.data[i] - y.data[i];
                grad.data[i] = d;
                v += d * d;
            }
            return 0.5 * v;
        };
    } else {
        f = [&](const Image& x, Image& grad) {
            const double reg = m.value_grad(x, sigma, grad);
            double v = 0.0;
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                const double d = x.data[i] - y.data[i];
                grad.data[i] = lambda * grad.data[i] + d;
                v += d * d;
            }
            return 0.5 * v + lambda * reg;
        };
    }
    return solve(f, y, gamma, cfg);
}

} // namespace mfoe
