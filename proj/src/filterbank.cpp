#include "mfoe/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfoe/errors.hpp"
#include "mfoe/rng.hpp"

namespace mfoe {

namespace {

// out[o] += correlation of in[i] with kernel slice (o,i); 'same' size, zero
// padded. Output rows form the outer loop so the handful of source rows a
// row depends on stay cached while all channels and taps sweep over them.
void stage_forward(const ConvStage& s, const std::vector<double>& in, int rows, int cols,
                   std::vector<double>& out) {
    const int ch = (s.kh - 1) / 2;
    const int cw = (s.kw - 1) / 2;
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int y = 0; y < rows; ++y) {
        for (int o = 0; o < s.out_ch; ++o) {
            double* __restrict orow = out.data() + o * plane + static_cast<std::size_t>(y) * cols;
            for (int i = 0; i < s.in_ch; ++i) {
                const double* inp = in.data() + i * plane;
                for (int u = 0; u < s.kh; ++u) {
                    const int yy = y + u - ch;
                    if (yy < 0 || yy >= rows) continue;
                    const double* irow = inp + static_cast<std::size_t>(yy) * cols;
                    for (int v = 0; v < s.kw; ++v) {
                        const double k = s.at(o, i, u, v);
                        if (k == 0.0) continue;
                        const int dx = v - cw;
                        const int x0 = std::max(0, -dx), x1 = std::min(cols, cols - dx);
                        const double* __restrict src = irow + dx;
                        for (int x = x0; x < x1; ++x) orow[x] += k * src[x];
                    }
                }
            }
        }
    }
}

// exact adjoint of stage_forward: scatter g[o] back into gin[i]
void stage_adjoint(const ConvStage& s, const std::vector<double>& g, int rows, int cols,
                   std::vector<double>& gin) {
    const int ch = (s.kh - 1) / 2;
    const int cw = (s.kw - 1) / 2;
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int y = 0; y < rows; ++y) {
        for (int o = 0; o < s.out_ch; ++o) {
            const double* grow = g.data() + o * plane + static_cast<std::size_t>(y) * cols;
            for (int i = 0; i < s.in_ch; ++i) {
                double* ginp = gin.data() + i * plane;
                for (int u = 0; u < s.kh; ++u) {
                    const int yy = y + u - ch;
                    if (yy < 0 || yy >= rows) continue;
                    double* irow = ginp + static_cast<std::size_t>(yy) * cols;
                    for (int v = 0; v < s.kw; ++v) {
                        const double k = s.at(o, i, u, v);
                        if (k == 0.0) continue;
                        const int dx = v - cw;
                        const int x0 = std::max(0, -dx), x1 = std::min(cols, cols - dx);
                        double* __restrict dst = irow + dx;
                        const double* __restrict gsrc = grow;
                        for (int x = x0; x < x1; ++x) dst[x] += k * gsrc[x];
                    }
                }
            }
        }
    }
}

// full 2-D convolution of two kernels (composition of two correlations is the
// correlation with their full convolution)
std::vector<double> conv_full(const std::vector<double>& a, int ah, int aw,
                              const std::vector<double>& b, int bh, int bw) {
    const int rh = ah + bh - 1, rw = aw + bw - 1;
    std::vector<double> r(static_cast<std::size_t>(rh) * rw, 0.0);
    for (int i = 0; i < ah; ++i)
        for (int j = 0; j < aw; ++j) {
            const double av = a[static_cast<std::size_t>(i) * aw + j];
            if (av == 0.0) continue;
            for (int u = 0; u < bh; ++u)
                for (int v = 0; v < bw; ++v)
                    r[static_cast<std::size_t>(i + u) * rw + (j + v)] +=
                        av * b[static_cast<std::size_t>(u) * bw + v];
        }
    return r;
}

} // namespace

FilterBank::FilterBank(std::array<ConvStage, 3> stages, double spectral_scale, int K, int d)
    : stages_(std::move(stages)), scale_(spectral_scale), K_(K), d_(d) {
    if (K_ < 1 || d_ < 1) throw ConfigError("FilterBank: K and d must be >= 1");
    if (stages_[0].in_ch != 1) throw ConfigError("FilterBank: first stage must take 1 channel");
    if (stages_[1].in_ch != stages_[0].out_ch || stages_[2].in_ch != stages_[1].out_ch)
        throw ConfigError("FilterBank: stage channel counts do not chain");
    if (stages_[2].out_ch != K_ * d_)
        throw ConfigError("FilterBank: last stage must produce K*d channels");
    for (const auto& s : stages_) {
        if (s.kh < 1 || s.kw < 1 || s.out_ch < 1 || s.in_ch < 1)
            throw ConfigError("FilterBank: invalid stage shape");
        if (s.taps.size() != static_cast<std::size_t>(s.out_ch) * s.in_ch * s.kh * s.kw)
            throw ConfigError("FilterBank: stage tap count does not match its shape");
        for (double t : s.taps)
            if (!std::isfinite(t)) throw ConfigError("FilterBank: non-finite kernel tap");
    }
    if (!(scale_ > 0.0) || !std::isfinite(scale_))
        throw ConfigError("FilterBank: spectral_scale must be positive and finite");
}

CoefficientStack FilterBank::apply_W(const Image& x) const {
    if (x.rows < composite_rows() || x.cols < composite_cols())
        throw std::domain_error("apply_W: image smaller than the composed filter footprint");
    if (!x.all_finite()) throw std::domain_error("apply_W: non-finite image");

    const std::size_t plane = x.size();
    std::vector<double> buf_a(x.data);
    std::vector<double> buf_b;
    for (int si = 0; si < 2; ++si) {
        buf_b.assign(plane * stages_[si].out_ch, 0.0);
        stage_forward(stages_[si], buf_a, x.rows, x.cols, buf_b);
        buf_a.swap(buf_b);
    }
    CoefficientStack out(K_, d_, x.rows, x.cols);
    stage_forward(stages_[2], buf_a, x.rows, x.cols, out.values);
    for (double& v : out.values) v *= scale_;
    return out;
}

Image FilterBank::apply_Wt(const CoefficientStack& c) const {
    if (c.K != K_ || c.d != d_)
        throw std::domain_error("apply_Wt: stack group shape does not match the bank");
    if (c.rows < composite_rows() || c.cols < composite_cols())
        throw std::domain_error("apply_Wt: stack smaller than the composed filter footprint");

    const std::size_t plane = static_cast<std::size_t>(c.rows) * c.cols;
    std::vector<double> top(c.values);
    for (double& v : top) v *= scale_;

    std::vector<double> mid(plane * stages_[2].in_ch, 0.0);
    stage_adjoint(stages_[2], top, c.rows, c.cols, mid);
    std::vector<double> low(plane * stages_[1].in_ch, 0.0);
    stage_adjoint(stages_[1], mid, c.rows, c.cols, low);

    Image out(c.rows, c.cols);
    std::vector<double> img(plane, 0.0);
    stage_adjoint(stages_[0], low, c.rows, c.cols, img);
    out.data = std::move(img);
    return out;
}

std::vector<std::vector<double>> composed_filters(const FilterBank& fb, int* rows, int* cols) {
    const auto& s = fb.stages();
    const int mh = s[0].kh + s[1].kh - 1, mw = s[0].kw + s[1].kw - 1;

    // M[i2] = sum_i1 conv(k1[i1], k2[i2][i1])
    std::vector<std::vector<double>> mid(s[1].out_ch);
    for (int i2 = 0; i2 < s[1].out_ch; ++i2) {
        std::vector<double> acc(static_cast<std::size_t>(mh) * mw, 0.0);
        for (int i1 = 0; i1 < s[0].out_ch; ++i1) {
            std::vector<double> k1(s[0].taps.begin() + static_cast<std::ptrdiff_t>(i1) * s[0].kh * s[0].kw,
                                   s[0].taps.begin() + static_cast<std::ptrdiff_t>(i1 + 1) * s[0].kh * s[0].kw);
            std::vector<double> k2(s[1].kh * s[1].kw);
            for (int u = 0; u < s[1].kh; ++u)
                for (int v = 0; v < s[1].kw; ++v) k2[u * s[1].kw + v] = s[1].at(i2, i1, u, v);
            const auto c = conv_full(k1, s[0].kh, s[0].kw, k2, s[1].kh, s[1].kw);
            for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += c[t];
        }
        mid[i2] = std::move(acc);
    }

    const int fh = fb.composite_rows(), fw = fb.composite_cols();
    std::vector<std::vector<double>> filters(s[2].out_ch);
    for (int o = 0; o < s[2].out_ch; ++o) {
        std::vector<double> acc(static_cast<std::size_t>(fh) * fw, 0.0);
        for (int i2 = 0; i2 < s[2].in_ch; ++i2) {
            std::vector<double> k3(s[2].kh * s[2].kw);
            for (int u = 0; u < s[2].kh; ++u)
                for (int v = 0; v < s[2].kw; ++v) k3[u * s[2].kw + v] = s[2].at(o, i2, u, v);
            const auto c = conv_full(mid[i2], mh, mw, k3, s[2].kh, s[2].kw);
            for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += c[t];
        }
        for (double& v : acc) v *= fb.spectral_scale();
        filters[o] = std::move(acc);
    }
    if (rows) *rows = fh;
    if (cols) *cols = fw;
    return filters;
}

FilterBank project_zero_mean(const FilterBank& fb) {
    auto stages = fb.stages();

    // stages 1-2: shift every kernel family to unit DC gain
    for (int i1 = 0; i1 < stages[0].out_ch; ++i1) {
        double s = 0.0;
        const int n = stages[0].kh * stages[0].kw;
        for (int u = 0; u < stages[0].kh; ++u)
            for (int v = 0; v < stages[0].kw; ++v) s += stages[0].at(i1, 0, u, v);
        const double shift = (1.0 - s) / n;
        for (int u = 0; u < stages[0].kh; ++u)
            for (int v = 0; v < stages[0].kw; ++v) stages[0].at(i1, 0, u, v) += shift;
    }
    for (int i2 = 0; i2 < stages[1].out_ch; ++i2) {
        double s = 0.0;
        const int n = stages[1].in_ch * stages[1].kh * stages[1].kw;
        for (int i1 = 0; i1 < stages[1].in_ch; ++i1)
            for (int u = 0; u < stages[1].kh; ++u)
                for (int v = 0; v < stages[1].kw; ++v) s += stages[1].at(i2, i1, u, v);
        const double shift = (1.0 - s) / n;
        for (int i1 = 0; i1 < stages[1].in_ch; ++i1)
            for (int u = 0; u < stages[1].kh; ++u)
                for (int v = 0; v < stages[1].kw; ++v) stages[1].at(i2, i1, u, v) += shift;
    }
    // stage 3: zero total mean per output slice
    for (int o = 0; o < stages[2].out_ch; ++o) {
        double s = 0.0;
        const int n = stages[2].in_ch * stages[2].kh * stages[2].kw;
        for (int i2 = 0; i2 < stages[2].in_ch; ++i2)
            for (int u = 0; u < stages[2].kh; ++u)
                for (int v = 0; v < stages[2].kw; ++v) s += stages[2].at(o, i2, u, v);
        const double shift = s / n;
        for (int i2 = 0; i2 < stages[2].in_ch; ++i2)
            for (int u = 0; u < stages[2].kh; ++u)
                for (int v = 0; v < stages[2].kw; ++v) stages[2].at(o, i2, u, v) -= shift;
    }
    return FilterBank(std::move(stages), fb.spectral_scale(), fb.K(), fb.d());
}

double estimate_spectral_norm(const FilterBank& fb, int rows, int cols, double rel_tol,
                              int max_iter, int* iterations) {
    Rng rng(0x57a6e5u);
    Image v(rows, cols);
    for (double& e : v.data) e = rng.normal();
    const double n0 = norm2(v);
    for (double& e : v.data) e /= n0;

    double lambda = 0.0;
    int used = 0;
    for (int it = 0; it < max_iter; ++it) {
        ++used;
        const CoefficientStack wv = fb.apply_W(v);
        double lambda_new = 0.0;
        for (double e : wv.values) lambda_new += e * e; // <v, W^T W v> = ||Wv||^2
        Image wtwv = fb.apply_Wt(wv);
        const double nn = norm2(wtwv);
        if (nn == 0.0) {
            if (iterations) *iterations = used;
            return 0.0;
        }
        for (double& e : wtwv.data) e /= nn;
        v = std::move(wtwv);
        if (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * std::abs(lambda_new)) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }
    if (iterations) *iterations = used;
    return std::sqrt(std::max(lambda, 0.0));
}

FilterBank normalize_spectral(const FilterBank& fb, int rows, int cols) {
    const double norm = estimate_spectral_norm(fb, rows, cols);
    if (!(norm > 0.0))
        throw NumericError("normalize_spectral: operator norm estimate is zero");
    return FilterBank(fb.stages(), fb.spectral_scale() / norm, fb.K(), fb.d());
}

FilterBank make_random_filterbank(int K, int d, std::uint64_t seed, std::array<int, 3> sizes,
                                  std::array<int, 2> channels, int norm_size) {
    Rng rng(mix_seed(seed, 0xf17e9));
    std::array<ConvStage, 3> st{ConvStage(channels[0], 1, sizes[0], sizes[0]),
                                ConvStage(channels[1], channels[0], sizes[1], sizes[1]),
                                ConvStage(K * d, channels[1], sizes[2], sizes[2])};
    for (auto& s : st)
        for (double& t : s.taps) t = rng.normal();
    FilterBank fb(std::move(st), 1.0, K, d);
    return normalize_spectral(project_zero_mean(fb), norm_size, norm_size);
}

} // namespace mfoe
