#include "mfoe/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfoe {

double psnr(const Image& x, const Image& ref) {
    if (!x.same_shape(ref)) throw std::domain_error("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - ref.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.data.size());
    if (mse < 1e-20) return 200.0;
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::vector<double> gaussian_window() {
    std::vector<double> w(kWin * kWin);
    const double sigma = 1.5, c = (kWin - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            const double r2 = (i - c) * (i - c) + (j - c) * (j - c);
            w[i * kWin + j] = std::exp(-r2 / (2.0 * sigma * sigma));
            sum += w[i * kWin + j];
        }
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

double ssim(const Image& x, const Image& ref) {
    if (!x.same_shape(ref)) throw std::domain_error("ssim: shape mismatch");
    if (x.rows < kWin || x.cols < kWin)
        throw std::domain_error("ssim: image smaller than the 11x11 window");

    static const std::vector<double> w = gaussian_window();
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03; // (K L)^2 with peak L = 1

    double acc = 0.0;
    long count = 0;
    for (int y = 0; y + kWin <= x.rows; ++y) {
        for (int xx = 0; xx + kWin <= x.cols; ++xx) {
            double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int u = 0; u < kWin; ++u)
                for (int v = 0; v < kWin; ++v) {
                    const double wa = w[u * kWin + v];
                    const double a = x(y + u, xx + v);
                    const double b = ref(y + u, xx + v);
                    mx += wa * a;
                    my += wa * b;
                    sxx += wa * a * a;
                    syy += wa * b * b;
                    sxy += wa * a * b;
                }
            const double vx = sxx - mx * mx;
            const double vy = syy - my * my;
            const double cov = sxy - mx * my;
            const double s = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                             ((mx * mx + my * my + c1) * (vx + vy + c2));
            acc += s;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

} // namespace mfoe
