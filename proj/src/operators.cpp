#include "mfoe/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "mfoe/errors.hpp"
#include "mfoe/fft.hpp"
#include "mfoe/rng.hpp"

namespace mfoe {

double ForwardOperator::norm_estimate() const {
    std::call_once(norm_cache_->once, [this] { norm_cache_->value = estimate_norm(*this); });
    return norm_cache_->value;
}

double estimate_norm(const ForwardOperator& op, double rel_tol, int max_iter, int* iterations) {
    Rng rng(0x0e57u);
    Image v(op.image_rows(), op.image_cols());
    for (double& e : v.data) e = rng.normal();
    const double n0 = norm2(v);
    for (double& e : v.data) e /= n0;

    double lambda = 0.0;
    int used = 0;
    for (int it = 0; it < max_iter; ++it) {
        ++used;
        const std::vector<double> hv = op.apply(v);
        double lambda_new = 0.0;
        for (double e : hv) lambda_new += e * e;
        Image w = op.adjoint(hv);
        const double nn = norm2(w);
        if (nn == 0.0) {
            if (iterations) *iterations = used;
            return 0.0;
        }
        for (double& e : w.data) e /= nn;
        v = std::move(w);
        if (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * std::abs(lambda_new)) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }
    if (iterations) *iterations = used;
    return std::sqrt(std::max(lambda, 0.0));
}

// ---------------------------------------------------------------- identity

IdentityOp::IdentityOp(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw ConfigError("IdentityOp: invalid size");
}

std::vector<double> IdentityOp::apply(const Image& x) const {
    if (x.rows != rows_ || x.cols != cols_) throw std::domain_error("identity: shape mismatch");
    return x.data;
}

Image IdentityOp::adjoint(std::span<const double> v) const {
    if (v.size() != measurement_size()) throw std::domain_error("identity: shape mismatch");
    Image out(rows_, cols_);
    std::copy(v.begin(), v.end(), out.data.begin());
    return out;
}

// -------------------------------------------------------------------- blur

BlurOp::BlurOp(int rows, int cols, Image kernel)
    : rows_(rows), cols_(cols), kernel_(std::move(kernel)) {
    if (rows < 1 || cols < 1) throw ConfigError("BlurOp: invalid size");
    if (kernel_.rows < 1 || kernel_.cols < 1) throw ConfigError("BlurOp: empty kernel");
    if (!kernel_.all_finite()) throw ConfigError("BlurOp: non-finite kernel");
}

std::vector<double> BlurOp::apply(const Image& x) const {
    if (x.rows != rows_ || x.cols != cols_) throw std::domain_error("blur: shape mismatch");
    const int ch = (kernel_.rows - 1) / 2, cw = (kernel_.cols - 1) / 2;
    std::vector<double> out(x.size(), 0.0);
    // true convolution: out(y,x) = sum_k k(u,v) x(y-u+ch, x-v+cw)
    for (int u = 0; u < kernel_.rows; ++u) {
        const int dy = ch - u;
        const int y0 = std::max(0, -dy), y1 = std::min(rows_, rows_ - dy);
        for (int v = 0; v < kernel_.cols; ++v) {
            const double k = kernel_(u, v);
            if (k == 0.0) continue;
            const int dx = cw - v;
            const int x0 = std::max(0, -dx), x1 = std::min(cols_, cols_ - dx);
            for (int y = y0; y < y1; ++y) {
                double* orow = out.data() + static_cast<std::size_t>(y) * cols_;
                const double* irow = x.data.data() + static_cast<std::size_t>(y + dy) * cols_ + dx;
                for (int xx = x0; xx < x1; ++xx) orow[xx] += k * irow[xx];
            }
        }
    }
    return out;
}

Image BlurOp::adjoint(std::span<const double> v) const {
    if (v.size() != measurement_size()) throw std::domain_error("blur: shape mismatch");
    const int ch = (kernel_.rows - 1) / 2, cw = (kernel_.cols - 1) / 2;
    Image out(rows_, cols_);
    for (int u = 0; u < kernel_.rows; ++u) {
        const int dy = ch - u;
        const int y0 = std::max(0, -dy), y1 = std::min(rows_, rows_ - dy);
        for (int vv = 0; vv < kernel_.cols; ++vv) {
            const double k = kernel_(u, vv);
            if (k == 0.0) continue;
            const int dx = cw - vv;
            const int x0 = std::max(0, -dx), x1 = std::min(cols_, cols_ - dx);
            for (int y = y0; y < y1; ++y) {
                const double* mrow = v.data() + static_cast<std::size_t>(y) * cols_;
                double* orow = out.data.data() + static_cast<std::size_t>(y + dy) * cols_ + dx;
                for (int xx = x0; xx < x1; ++xx) orow[xx] += k * mrow[xx];
            }
        }
    }
    return out;
}

// --------------------------------------------------------------------- mri

std::vector<int> build_mri_mask(int n, double m_acc, double m_cf, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw ConfigError("build_mri_mask: n must be even and >= 2");
    if (!(m_cf > 0.0) || !(m_cf < 1.0))
        throw std::domain_error("build_mri_mask: requires 0 < m_cf < 1");
    if (!(m_acc >= 1.0)) throw std::domain_error("build_mri_mask: requires m_acc >= 1");

    const int center = static_cast<int>(std::floor(n * m_cf));
    const int total = static_cast<int>(std::floor(n / m_acc));
    if (center < 1) throw ConfigError("build_mri_mask: center fraction keeps no columns");
    if (total < center)
        throw ConfigError("build_mri_mask: total budget smaller than the center block");

    const int start = (n - center) / 2;
    std::vector<bool> kept(n, false);
    for (int c = start; c < start + center; ++c) kept[c] = true;

    // selection sampling over the non-center columns, ascending
    int remaining_pool = n - center;
    int to_pick = total - center;
    Rng rng(mix_seed(seed, 0xa5c));
    for (int c = 0; c < n && to_pick > 0; ++c) {
        if (kept[c]) continue;
        if (rng.below(static_cast<std::uint64_t>(remaining_pool)) <
            static_cast<std::uint64_t>(to_pick)) {
            kept[c] = true;
            --to_pick;
        }
        --remaining_pool;
    }

    std::vector<int> mask;
    mask.reserve(total);
    for (int c = 0; c < n; ++c)
        if (kept[c]) mask.push_back(c);
    return mask;
}

MriOp::MriOp(int n, std::vector<int> mask_columns) : n_(n), mask_(std::move(mask_columns)) {
    if (n_ < 2 || n_ % 2 != 0) throw ConfigError("MriOp: n must be even and >= 2");
    if (mask_.empty()) throw ConfigError("MriOp: empty k-space mask");
    std::sort(mask_.begin(), mask_.end());
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        if (mask_[i] < 0 || mask_[i] >= n_) throw ConfigError("MriOp: mask column out of range");
        if (i > 0 && mask_[i] == mask_[i - 1]) throw ConfigError("MriOp: duplicate mask column");
    }
}

std::vector<double> MriOp::apply(const Image& x) const {
    if (x.rows != n_ || x.cols != n_) throw std::domain_error("mri: shape mismatch");
    std::vector<std::complex<double>> k(static_cast<std::size_t>(n_) * n_);
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = x.data[i];
    fft2_ortho(k.data(), n_, n_, false);

    std::vector<double> out;
    out.reserve(measurement_size());
    for (int s : mask_) {
        const int col = (s + n_ / 2) % n_; // shifted -> unshifted column index
        for (int r = 0; r < n_; ++r) {
            const auto v = k[static_cast<std::size_t>(r) * n_ + col];
            out.push_back(v.real());
            out.push_back(v.imag());
        }
    }
    return out;
}

Image MriOp::adjoint(std::span<const double> v) const {
    if (v.size() != measurement_size()) throw std::domain_error("mri: shape mismatch");
    std::vector<std::complex<double>> k(static_cast<std::size_t>(n_) * n_, 0.0);
    std::size_t idx = 0;
    for (int s : mask_) {
        const int col = (s + n_ / 2) % n_;
        for (int r = 0; r < n_; ++r) {
            k[static_cast<std::size_t>(r) * n_ + col] = {v[idx], v[idx + 1]};
            idx += 2;
        }
    }
    fft2_ortho(k.data(), n_, n_, true);
    Image out(n_, n_);
    // the domain is real images, so the adjoint of the real->complex embedding
    // takes the real part
    for (std::size_t i = 0; i < k.size(); ++i) out.data[i] = k[i].real();
    return out;
}

// ---------------------------------------------------------------------- ct

CtOp::CtOp(int n, std::vector<double> angles, int detectors)
    : n_(n), angles_(std::move(angles)), detectors_(detectors) {
    if (n_ < 2) throw ConfigError("CtOp: image side must be >= 2");
    if (angles_.empty()) throw ConfigError("CtOp: no projection angles");
    if (detectors_ < 1) throw ConfigError("CtOp: detectors must be >= 1");
    for (double a : angles_)
        if (!std::isfinite(a)) throw ConfigError("CtOp: non-finite angle");
}

std::vector<double> CtOp::apply(const Image& x) const {
    if (x.rows != n_ || x.cols != n_) throw std::domain_error("ct: shape mismatch (square image)");
    const double c = (n_ - 1) / 2.0;
    const double T = n_ * std::numbers::sqrt2 / 2.0 + 1.0;
    const int steps = static_cast<int>(2.0 * T);
    std::vector<double> sino(measurement_size(), 0.0);

    for (std::size_t a = 0; a < angles_.size(); ++a) {
        const double sa = std::sin(angles_[a]), ca = std::cos(angles_[a]);
        for (int j = 0; j < detectors_; ++j) {
            const double s = j - (detectors_ - 1) / 2.0;
            double acc = 0.0;
            for (int i = 0; i <= steps; ++i) {
                const double t = -T + i;
                const double px = c + s * ca - t * sa;
                const double py = c + s * sa + t * ca;
                const int x0 = static_cast<int>(std::floor(px));
                const int y0 = static_cast<int>(std::floor(py));
                if (x0 < -1 || x0 > n_ - 1 || y0 < -1 || y0 > n_ - 1) continue;
                const double fx = px - x0, fy = py - y0;
                const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
                const double w10 = (1 - fx) * fy, w11 = fx * fy;
                if (y0 >= 0 && x0 >= 0) acc += w00 * x(y0, x0);
                if (y0 >= 0 && x0 + 1 < n_) acc += w01 * x(y0, x0 + 1);
                if (y0 + 1 < n_ && x0 >= 0) acc += w10 * x(y0 + 1, x0);
                if (y0 + 1 < n_ && x0 + 1 < n_) acc += w11 * x(y0 + 1, x0 + 1);
            }
            sino[a * detectors_ + j] = acc;
        }
    }
    return sino;
}

Image CtOp::adjoint(std::span<const double> v) const {
    if (v.size() != measurement_size()) throw std::domain_error("ct: shape mismatch");
    const double c = (n_ - 1) / 2.0;
    const double T = n_ * std::numbers::sqrt2 / 2.0 + 1.0;
    const int steps = static_cast<int>(2.0 * T);
    Image out(n_, n_);

    for (std::size_t a = 0; a < angles_.size(); ++a) {
        const double sa = std::sin(angles_[a]), ca = std::cos(angles_[a]);
        for (int j = 0; j < detectors_; ++j) {
            const double s = j - (detectors_ - 1) / 2.0;
            const double val = v[a * detectors_ + j];
            if (val == 0.0) continue;
            for (int i = 0; i <= steps; ++i) {
                const double t = -T + i;
                const double px = c + s * ca - t * sa;
                const double py = c + s * sa + t * ca;
                const int x0 = static_cast<int>(std::floor(px));
                const int y0 = static_cast<int>(std::floor(py));
                if (x0 < -1 || x0 > n_ - 1 || y0 < -1 || y0 > n_ - 1) continue;
                const double fx = px - x0, fy = py - y0;
                const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
                const double w10 = (1 - fx) * fy, w11 = fx * fy;
                if (y0 >= 0 && x0 >= 0) out(y0, x0) += w00 * val;
                if (y0 >= 0 && x0 + 1 < n_) out(y0, x0 + 1) += w01 * val;
                if (y0 + 1 < n_ && x0 >= 0) out(y0 + 1, x0) += w10 * val;
                if (y0 + 1 < n_ && x0 + 1 < n_) out(y0 + 1, x0 + 1) += w11 * val;
            }
        }
    }
    return out;
}

Image CtOp::fbp(std::span<const double> sinogram) const {
    if (sinogram.size() != measurement_size()) throw std::domain_error("fbp: shape mismatch");
    // discrete Ram-Lak kernel at unit detector pitch:
    //   h(0) = 1/4, h(odd m) = -1/(pi^2 m^2), h(even m) = 0
    std::vector<double> h(detectors_, 0.0);
    h[0] = 0.25;
    for (int m = 1; m < detectors_; m += 2)
        h[m] = -1.0 / (std::numbers::pi * std::numbers::pi * m * m);

    std::vector<double> filtered(sinogram.size(), 0.0);
    for (std::size_t a = 0; a < angles_.size(); ++a) {
        const double* row = sinogram.data() + a * detectors_;
        double* frow = filtered.data() + a * detectors_;
        for (int j = 0; j < detectors_; ++j) {
            double acc = 0.0;
            for (int m = 0; m < detectors_; ++m) {
                const int lag = j >= m ? j - m : m - j;
                acc += row[m] * h[lag];
            }
            frow[j] = acc;
        }
    }
    Image out = adjoint(filtered);
    const double scale = std::numbers::pi / static_cast<double>(angles_.size());
    for (double& e : out.data) e *= scale;
    return out;
}

// ----------------------------------------------------------------- utility

Measurement simulate(const ForwardOperator& op, const Image& x_clean, double sigma_w,
                     std::uint64_t seed) {
    if (sigma_w < 0.0 || !std::isfinite(sigma_w))
        throw std::domain_error("simulate: sigma_w must be nonnegative");
    Measurement m;
    m.values = op.apply(x_clean);
    m.noise_sigma = sigma_w;
    if (sigma_w > 0.0) {
        Rng rng(mix_seed(seed, 0x105e));
        for (double& v : m.values) v += sigma_w * rng.normal();
    }
    return m;
}

std::vector<double> uniform_angles(int count) {
    if (count < 1) throw ConfigError("uniform_angles: count must be >= 1");
    std::vector<double> a(count);
    for (int i = 0; i < count; ++i) a[i] = std::numbers::pi * i / count;
    return a;
}

} // namespace mfoe
