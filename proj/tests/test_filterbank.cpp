#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfoe/errors.hpp"
#include "mfoe/filterbank.hpp"
#include "mfoe/rng.hpp"

using namespace mfoe;

namespace {

// brute-force 'same' zero-padded correlation for the identity-stage test
Image correlate_same(const Image& x, const std::vector<double>& k, int kh, int kw) {
    Image out(x.rows, x.cols);
    const int ch = (kh - 1) / 2, cw = (kw - 1) / 2;
    for (int y = 0; y < x.rows; ++y)
        for (int xx = 0; xx < x.cols; ++xx) {
            double s = 0.0;
            for (int u = 0; u < kh; ++u)
                for (int v = 0; v < kw; ++v) {
                    const int yy = y + u - ch, xj = xx + v - cw;
                    if (yy >= 0 && yy < x.rows && xj >= 0 && xj < x.cols)
                        s += k[u * kw + v] * x(yy, xj);
                }
            out(y, xx) = s;
        }
    return out;
}

FilterBank random_bank(std::uint64_t seed, int K = 2, int d = 2,
                       std::array<int, 3> sizes = {3, 3, 3}, std::array<int, 2> ch = {2, 3}) {
    Rng rng(seed);
    std::array<ConvStage, 3> st{ConvStage(ch[0], 1, sizes[0], sizes[0]),
                                ConvStage(ch[1], ch[0], sizes[1], sizes[1]),
                                ConvStage(K * d, ch[1], sizes[2], sizes[2])};
    for (auto& s : st)
        for (double& t : s.taps) t = rng.normal();
    return FilterBank(std::move(st), 1.0, K, d);
}

Image random_image(Rng& rng, int rows, int cols) {
    Image x(rows, cols);
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
    return x;
}

CoefficientStack random_stack(Rng& rng, int K, int d, int rows, int cols) {
    CoefficientStack c(K, d, rows, cols);
    for (double& v : c.values) v = rng.uniform(-1.0, 1.0);
    return c;
}

} // namespace

TEST_CASE("identity stages reduce to a plain convolution with stage-3 kernels") {
    Rng rng(11);
    std::array<ConvStage, 3> st{ConvStage(1, 1, 1, 1), ConvStage(1, 1, 1, 1),
                                ConvStage(2, 1, 3, 3)};
    st[0].at(0, 0, 0, 0) = 1.0;
    st[1].at(0, 0, 0, 0) = 1.0;
    std::vector<std::vector<double>> k3(2, std::vector<double>(9));
    for (int o = 0; o < 2; ++o)
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v) {
                const double t = rng.uniform(-1.0, 1.0);
                st[2].at(o, 0, u, v) = t;
                k3[o][u * 3 + v] = t;
            }
    FilterBank fb(std::move(st), 1.0, 2, 1);

    const Image x = random_image(rng, 9, 7);
    const auto stack = fb.apply_W(x);
    for (int o = 0; o < 2; ++o) {
        const Image ref = correlate_same(x, k3[o], 3, 3);
        for (int i = 0; i < x.rows; ++i)
            for (int j = 0; j < x.cols; ++j)
                CHECK(stack.channel(o)[i * x.cols + j] ==
                      doctest::Approx(ref(i, j)).epsilon(1e-13));
    }
}

TEST_CASE("zero image maps to a zero stack, zero stack to a zero image") {
    const auto fb = random_bank(3);
    const Image z(12, 12);
    const auto stack = fb.apply_W(z);
    for (double v : stack.values) CHECK(v == 0.0);
    const Image back = fb.apply_Wt(CoefficientStack(fb.K(), fb.d(), 12, 12));
    for (double v : back.data) CHECK(v == 0.0);
}

TEST_CASE("linearity of apply_W") {
    const auto fb = random_bank(17);
    Rng rng(4);
    const Image x = random_image(rng, 10, 11);
    const Image y = random_image(rng, 10, 11);
    const double a = 0.7, b = -1.3;
    Image combo(10, 11);
    for (std::size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = a * x.data[i] + b * y.data[i];
    const auto sc = fb.apply_W(combo);
    const auto sx = fb.apply_W(x);
    const auto sy = fb.apply_W(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < sc.values.size(); ++i) {
        const double ref = a * sx.values[i] + b * sy.values[i];
        num = std::max(num, std::abs(sc.values[i] - ref));
        den = std::max(den, std::abs(ref));
    }
    CHECK(num <= 1e-12 * std::max(den, 1.0));
}

TEST_CASE("adjoint identity <Wx, c> = <x, W^T c> on random 16x16 inputs") {
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        const auto fb = random_bank(100 + trial);
        const Image x = random_image(rng, 16, 16);
        const auto c = random_stack(rng, fb.K(), fb.d(), 16, 16);
        const auto wx = fb.apply_W(x);
        const Image wtc = fb.apply_Wt(c);
        double lhs = 0.0;
        for (std::size_t i = 0; i < wx.values.size(); ++i) lhs += wx.values[i] * c.values[i];
        const double rhs = dot(x, wtc);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1e-6}));
    }
}

TEST_CASE("constant input yields negligible interior response after zero-mean projection") {
    const auto fb = project_zero_mean(random_bank(23));
    const int n = 20;
    Image c(n, n, 0.37);
    const auto stack = fb.apply_W(c);
    const int r = std::max(fb.composite_rows(), fb.composite_cols()); // margin
    for (int ch = 0; ch < stack.channels(); ++ch)
        for (int i = r; i < n - r; ++i)
            for (int j = r; j < n - r; ++j)
                CHECK(std::abs(stack.channel(ch)[i * n + j]) < 1e-10);
}

TEST_CASE("project_zero_mean: composed-filter means vanish; idempotent") {
    const auto fb = project_zero_mean(random_bank(77, 3, 2, {5, 5, 3}, {4, 8}));
    const auto filters = composed_filters(fb);
    for (const auto& f : filters) {
        double m = 0.0;
        for (double v : f) m += v;
        CHECK(std::abs(m / static_cast<double>(f.size())) < 1e-12);
    }
    const auto fb2 = project_zero_mean(fb);
    for (int s = 0; s < 3; ++s)
        for (std::size_t i = 0; i < fb.stages()[s].taps.size(); ++i)
            CHECK(std::abs(fb2.stages()[s].taps[i] - fb.stages()[s].taps[i]) <= 1e-15);
}

TEST_CASE("project_zero_mean: all-ones single 3x3 kernel is shifted to zero mean") {
    std::array<ConvStage, 3> st{ConvStage(1, 1, 1, 1), ConvStage(1, 1, 1, 1),
                                ConvStage(1, 1, 3, 3)};
    st[0].at(0, 0, 0, 0) = 1.0;
    st[1].at(0, 0, 0, 0) = 1.0;
    for (auto& t : st[2].taps) t = 1.0;
    const auto fb = project_zero_mean(FilterBank(std::move(st), 1.0, 1, 1));
    for (double t : fb.stages()[2].taps) CHECK(t == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("composed filters match the apply_W impulse response") {
    const auto fb = random_bank(31);
    int fh = 0, fw = 0;
    const auto filters = composed_filters(fb, &fh, &fw);
    const int n = 4 * std::max(fh, fw) + 1;
    Image delta(n, n);
    delta(n / 2, n / 2) = 1.0;
    const auto stack = fb.apply_W(delta);
    // response of channel o at pixel p is the correlation kernel at (p - center)
    const int cy = n / 2 - (fh - 1) / 2 + fh - 1, cx = n / 2 - (fw - 1) / 2 + fw - 1;
    for (int o = 0; o < stack.channels(); ++o)
        for (int u = 0; u < fh; ++u)
            for (int v = 0; v < fw; ++v) {
                const double got = stack.channel(o)[(cy - u) * n + (cx - v)];
                CHECK(got == doctest::Approx(filters[o][u * fw + v]).epsilon(1e-12));
            }
}

TEST_CASE("DC Fourier coefficient of composed filters vanishes after projection") {
    const auto fb = project_zero_mean(random_bank(41));
    const auto filters = composed_filters(fb);
    for (const auto& f : filters) {
        double dc = 0.0;
        for (double v : f) dc += v;
        CHECK(std::abs(dc) < 1e-10);
    }
}

TEST_CASE("normalize_spectral: fixed point, homogeneity, post-normalization norm") {
    const auto fb = make_random_filterbank(2, 2, 7, {3, 3, 3}, {2, 3}, 24);

    // fixed point: normalizing an already-normalized bank changes scale by ~1
    const auto fb2 = normalize_spectral(fb, 24, 24);
    CHECK(fb2.spectral_scale() / fb.spectral_scale() == doctest::Approx(1.0).epsilon(1e-4));

    // homogeneity: scaling the bank by 3 gives multiplier 1/3
    FilterBank scaled(fb.stages(), 3.0 * fb.spectral_scale(), fb.K(), fb.d());
    const auto fb3 = normalize_spectral(scaled, 24, 24);
    CHECK(fb3.spectral_scale() / scaled.spectral_scale() == doctest::Approx(1.0 / 3.0).epsilon(1e-4));

    // power-iteration estimate after normalization
    const double est = estimate_spectral_norm(fb, 24, 24);
    CHECK(est >= 0.999);
    CHECK(est <= 1.001);
}

TEST_CASE("translation covariance in the interior") {
    const auto fb = random_bank(59);
    Rng rng(6);
    const int n = 18;
    Image x = random_image(rng, n, n);
    Image xs(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n - 1; ++j) xs(i, j + 1) = x(i, j);
    const auto s0 = fb.apply_W(x);
    const auto s1 = fb.apply_W(xs);
    const int m = std::max(fb.composite_rows(), fb.composite_cols());
    for (int ch = 0; ch < s0.channels(); ++ch)
        for (int i = m; i < n - m; ++i)
            for (int j = m; j < n - m - 1; ++j)
                CHECK(s1.channel(ch)[i * n + j + 1] ==
                      doctest::Approx(s0.channel(ch)[i * n + j]).epsilon(1e-12));
}

TEST_CASE("images smaller than the footprint are rejected") {
    const auto fb = random_bank(3); // composite 7x7
    CHECK_THROWS_AS((void)fb.apply_W(Image(5, 12)), std::domain_error);
    CHECK_THROWS_AS((void)fb.apply_W(Image(12, 6)), std::domain_error);
    CHECK_THROWS_AS((void)fb.apply_Wt(CoefficientStack(1, 1, 12, 12)), std::domain_error);
}
