#include "mfoe/projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace mfoe {

namespace {

void check_input(std::span<const double> x, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::domain_error("projection: radius must be positive and finite");
    if (x.empty())
        throw std::domain_error("projection: empty input");
    for (double v : x)
        if (!std::isfinite(v))
            throw std::domain_error("projection: non-finite input");
}

} // namespace

void project_l1_ball(std::span<const double> x, double radius, std::span<double> out) {
    check_input(x, radius);
    const std::size_t d = x.size();

    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    if (l1 <= radius) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }

    // soft-threshold level theta solving sum_i max(|x_i| - theta, 0) = radius,
    // found from the sorted magnitudes; stack buffer keeps the per-pixel hot
    // path allocation-free (d <= 60 in practice)
    double stack_mag[64];
    std::vector<double> heap_mag;
    double* mag = stack_mag;
    if (d > 64) {
        heap_mag.resize(d);
        mag = heap_mag.data();
    }
    for (std::size_t i = 0; i < d; ++i) mag[i] = std::abs(x[i]);
    if (d <= 16) {
        // descending insertion sort; beats introsort at coefficient-vector sizes
        for (std::size_t i = 1; i < d; ++i) {
            const double v = mag[i];
            std::size_t j = i;
            while (j > 0 && mag[j - 1] < v) {
                mag[j] = mag[j - 1];
                --j;
            }
            mag[j] = v;
        }
    } else {
        std::sort(mag, mag + d, std::greater<double>());
    }

    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        cumsum += mag[k];
        const double cand = (cumsum - radius) / static_cast<double>(k + 1);
        if (mag[k] - cand > 0.0)
            theta = cand;
        else
            break;
    }

    for (std::size_t i = 0; i < d; ++i) {
        const double t = std::abs(x[i]) - theta;
        out[i] = t > 0.0 ? std::copysign(t, x[i]) : 0.0;
    }
}

std::vector<double> project_l1_ball(std::span<const double> x, double radius) {
    std::vector<double> out(x.size());
    project_l1_ball(x, radius, out);
    return out;
}

void project_l2_ball(std::span<const double> x, double radius, std::span<double> out) {
    check_input(x, radius);
    double s = 0.0;
    for (double v : x) s += v * v;
    const double n = std::sqrt(s);
    if (n <= radius) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    const double f = radius / n;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i];
}

std::vector<double> project_l2_ball(std::span<const double> x, double radius) {
    std::vector<double> out(x.size());
    project_l2_ball(x, radius, out);
    return out;
}

} // namespace mfoe
