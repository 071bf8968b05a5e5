#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mfoe/analysis.hpp"
#include "mfoe/errors.hpp"
#include "mfoe/rng.hpp"

using namespace mfoe;

namespace {

// model around a bank with a single explicit third-stage kernel set
MfoeModel bank_model(std::array<ConvStage, 3> stages, int K, int d, double scale = 1.0) {
    FilterBank fb(std::move(stages), scale, K, d);
    std::vector<PotentialGroup> groups;
    for (int k = 0; k < K; ++k)
        groups.emplace_back(Eigen::MatrixXd::Zero(d, d), 1.0 + 1e-6, 0.01, NormKind::linf);
    std::vector<MuTableEntry> table{{0.0, std::vector<double>(K, 0.01)}};
    return MfoeModel(std::move(fb), std::move(groups), std::move(table), 1.0);
}

std::array<ConvStage, 3> identity_12(int out_ch, int kh, int kw) {
    std::array<ConvStage, 3> st{ConvStage(1, 1, 1, 1), ConvStage(1, 1, 1, 1),
                                ConvStage(out_ch, 1, kh, kw)};
    st[0].at(0, 0, 0, 0) = 1.0;
    st[1].at(0, 0, 0, 0) = 1.0;
    return st;
}

} // namespace

TEST_CASE("impulse response of a [1,-1] filter is the second difference") {
    auto st = identity_12(1, 1, 2);
    st[2].at(0, 0, 0, 0) = 1.0;
    st[2].at(0, 0, 0, 1) = -1.0;
    const auto m = bank_model(std::move(st), 1, 1);
    const Image r = impulse_response(m);
    REQUIRE(r.rows == 1);
    REQUIRE(r.cols == 3);
    CHECK(r(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r(0, 1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r(0, 2) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("default 11x11 composite gives a 21x21 impulse response that sums to zero") {
    const auto m = make_random_model(2, 2, NormKind::linf, 3, {5, 5, 3}, {2, 3}, 24);
    const Image r = impulse_response(m);
    CHECK(r.rows == 21);
    CHECK(r.cols == 21);
    double s = 0.0;
    for (double v : r.data) s += v;
    CHECK(std::abs(s) < 1e-10);
}

TEST_CASE("zero filter bank has a zero impulse response") {
    const auto m = bank_model(identity_12(2, 3, 3), 2, 1); // stage-3 taps all zero
    const Image r = impulse_response(m);
    for (double v : r.data) CHECK(v == 0.0);
}

TEST_CASE("impulse response equals the brute-force composed-filter autocorrelation") {
    const auto m = make_random_model(2, 2, NormKind::linf, 9, {3, 3, 3}, {2, 3}, 16);
    int fh = 0, fw = 0;
    const auto filters = composed_filters(m.filterbank(), &fh, &fw);
    const Image r = impulse_response(m);
    REQUIRE(r.rows == 2 * fh - 1);
    REQUIRE(r.cols == 2 * fw - 1);
    for (int dy = -(fh - 1); dy <= fh - 1; ++dy)
        for (int dx = -(fw - 1); dx <= fw - 1; ++dx) {
            double acc = 0.0;
            for (const auto& f : filters)
                for (int u = 0; u < fh; ++u)
                    for (int v = 0; v < fw; ++v) {
                        const int uu = u + dy, vv = v + dx;
                        if (uu >= 0 && uu < fh && vv >= 0 && vv < fw)
                            acc += f[static_cast<std::size_t>(u) * fw + v] *
                                   f[static_cast<std::size_t>(uu) * fw + vv];
                    }
            CHECK(r(dy + fh - 1, dx + fw - 1) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("frequency response: DC bin vanishes for a zero-mean bank") {
    const auto m = make_random_model(2, 2, NormKind::linf, 5, {3, 3, 3}, {2, 3}, 16);
    const Image mag = frequency_response(m, 64);
    CHECK(mag(0, 0) < 1e-10);
}

TEST_CASE("frequency response of [1,-1] matches 4 sin^2(pi f)") {
    auto st = identity_12(1, 1, 2);
    st[2].at(0, 0, 0, 0) = 1.0;
    st[2].at(0, 0, 0, 1) = -1.0;
    const auto m = bank_model(std::move(st), 1, 1);
    const int N = 48;
    const Image mag = frequency_response(m, N);
    for (int j = 0; j < N; ++j) {
        const double f = static_cast<double>(j) / N;
        const double expected = 4.0 * std::sin(std::numbers::pi * f) * std::sin(std::numbers::pi * f);
        CHECK(mag(0, j) == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("frequency response rejects undersized fft grids") {
    const auto m = make_random_model(1, 1, NormKind::linf, 2, {3, 3, 3}, {2, 2}, 16);
    CHECK_THROWS_AS((void)frequency_response(m, 8), std::domain_error); // response is 13x13
}

TEST_CASE("min singular value: identity bank is an isometry") {
    auto st = identity_12(1, 1, 1);
    st[2].at(0, 0, 0, 0) = 1.0;
    const auto m = bank_model(std::move(st), 1, 1);
    const auto rep = min_singular_value(m, 16);
    CHECK(rep.sigma_max == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.sigma_min == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.sigma_min <= rep.sigma_max);
    CHECK(rep.image_size == 16);
}

TEST_CASE("min singular value: constructed null space is detected") {
    // kernel [1, 0, -1] on odd-width images: x(., 1,0,1,0,1,...) is annihilated
    // (skew tridiagonal block of odd dimension); duplicated across 2 channels
    auto st = identity_12(2, 1, 3);
    for (int o = 0; o < 2; ++o) {
        st[2].at(o, 0, 0, 0) = 1.0;
        st[2].at(o, 0, 0, 2) = -1.0;
    }
    FilterBank raw({st[0], st[1], st[2]}, 1.0, 2, 1);
    const FilterBank fb = normalize_spectral(raw, 9, 9);
    std::vector<PotentialGroup> groups;
    for (int k = 0; k < 2; ++k)
        groups.emplace_back(Eigen::MatrixXd::Zero(1, 1), 1.0 + 1e-6, 0.01, NormKind::linf);
    std::vector<MuTableEntry> table{{0.0, {0.01, 0.01}}};
    const MfoeModel m(fb, std::move(groups), std::move(table), 1.0);

    // the Rayleigh change stalls below 1e-9 well before the null direction
    // dominates; the tighter eigenvalue tolerance drives it down
    const auto rep = min_singular_value(m, 9, 1e-13, 100000);
    CHECK(rep.sigma_min < 1e-6);
    CHECK(rep.sigma_max == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sigma_max agrees with the spectral normalization estimate") {
    const auto m = make_random_model(2, 2, NormKind::linf, 13, {3, 3, 3}, {2, 3}, 20);
    const auto rep = min_singular_value(m, 20);
    const double est = estimate_spectral_norm(m.filterbank(), 20, 20, 1e-9, 5000);
    CHECK(std::abs(rep.sigma_max - est) < 1e-6);
    CHECK(rep.sigma_min > 1e-6); // random normalized bank keeps a positive margin
}

TEST_CASE("potential surface: origin minimum, Q = 0 reduction, even symmetry") {
    Rng rng(4);
    PotentialGroup zero_q(Eigen::MatrixXd::Zero(2, 2), 1.0 + 1e-6, 0.1, NormKind::linf);
    const int n = 41;
    const Image surf = export_potential_surface(zero_q, -1.0, 1.0, n);

    // origin is on the grid (odd sample count) and is the minimum
    const double at_origin = surf(n / 2, n / 2);
    CHECK(at_origin == doctest::Approx(0.0).epsilon(1e-14));
    for (double v : surf.data) CHECK(v >= at_origin);

    // Q = 0: field equals mu * rho_mu evaluated on the grid
    PsiScratch ws;
    for (int i = 0; i < n; i += 7)
        for (int j = 0; j < n; j += 7) {
            const double x0 = -1.0 + j * 0.05, x1 = -1.0 + i * 0.05;
            const auto env = moreau_linf(std::vector<double>{x0, x1}, 0.1);
            CHECK(surf(i, j) == doctest::Approx(0.1 * env.value).epsilon(1e-12));
        }

    // symmetric Q: even field
    Eigen::MatrixXd qs(2, 2);
    qs << 0.3, 0.1, 0.1, 0.2;
    PotentialGroup sym(qs, 1.0, 0.05, NormKind::linf);
    const Image s2 = export_potential_surface(sym, -0.8, 0.8, 33);
    for (int i = 0; i < 33; ++i)
        for (int j = 0; j < 33; ++j)
            CHECK(s2(i, j) == doctest::Approx(s2(32 - i, 32 - j)).epsilon(1e-12));
}
