#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cbond/mvn.hpp"
#include "fixtures.hpp"

using namespace cbond;
using Catch::Matchers::WithinAbs;

namespace {

// P(X <= a, Y <= b) = int_{-inf}^{a} phi(x) Phi((b - r x)/sqrt(1 - r^2)) dx.
double bvn_by_quadrature(double a, double b, double r) {
    const double s = std::sqrt(1.0 - r * r);
    auto f = [&](double x) { return norm_pdf(x) * norm_cdf((b - r * x) / s); };
    return fixtures::simpson(f, -12.0, a, 20000);
}

CorrMatrix random_corr(std::mt19937_64& g, std::size_t m) {
    // R = D^{-1/2} (L L^T + eps I) D^{-1/2} with random L.
    std::normal_distribution<double> n01;
    std::vector<double> L(m * m);
    for (double& x : L) x = n01(g);
    std::vector<double> S(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < m; ++k) S[i * m + j] += L[i * m + k] * L[j * m + k];
            if (i == j) S[i * m + j] += 0.3;
        }
    CorrMatrix C(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) C.set(i, j, S[i * m + j] / std::sqrt(S[i * m + i] * S[j * m + j]));
    return C;
}

}  // namespace

TEST_CASE("bivariate normal against direct quadrature") {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> lim(-3.0, 3.0), cor(-0.99, 0.99);
    for (int k = 0; k < 40; ++k) {
        const double a = lim(g), b = lim(g), r = cor(g);
        CHECK_THAT(bvn_cdf(a, b, r), WithinAbs(bvn_by_quadrature(a, b, r), 1e-11));
    }
    CHECK_THAT(bvn_cdf(0.0, 0.0, 0.5), WithinAbs(1.0 / 3.0, 1e-14));
    CHECK_THAT(bvn_cdf(1.0, 2.0, 0.0), WithinAbs(norm_cdf(1.0) * norm_cdf(2.0), 1e-15));
}

TEST_CASE("low dimensional examples") {
    CorrMatrix I1(1);
    CHECK_THAT(mvn_value({{0.0}, I1}), WithinAbs(0.5, 1e-15));
    CorrMatrix C(2);
    C.set(0, 1, 0.5);
    CHECK_THAT(mvn_value({{0.0, 0.0}, C}), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK(mvn_value({{kInf, kInf}, C}) == 1.0);
    CHECK(mvn_value({{-kInf, 1.0}, C}) == 0.0);
    CHECK_THAT(mvn_value({{kInf, 0.3}, C}), WithinAbs(norm_cdf(0.3), 1e-15));
}

TEST_CASE("trivariate orthant probability") {
    // P(all <= 0) = 1/8 + (asin r12 + asin r13 + asin r23) / (4 pi)
    std::mt19937_64 g(11);
    for (int k = 0; k < 10; ++k) {
        const CorrMatrix C = random_corr(g, 3);
        const double want = 0.125 + (std::asin(C(0, 1)) + std::asin(C(0, 2)) + std::asin(C(1, 2))) / (4.0 * std::numbers::pi);
        CHECK_THAT(mvn_value({{0.0, 0.0, 0.0}, C}), WithinAbs(want, 1e-10));
    }
}

TEST_CASE("trivariate by one-dimensional conditioning oracle") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> lim(-2.0, 2.0);
    for (int k = 0; k < 10; ++k) {
        const CorrMatrix C = random_corr(g, 3);
        const double a0 = lim(g), a1 = lim(g), a2 = lim(g);
        const double r01 = C(0, 1), r02 = C(0, 2), r12 = C(1, 2);
        const double s1 = std::sqrt(1 - r01 * r01), s2 = std::sqrt(1 - r02 * r02);
        const double rc = (r12 - r01 * r02) / (s1 * s2);
        auto f = [&](double x) { return norm_pdf(x) * bvn_cdf((a1 - r01 * x) / s1, (a2 - r02 * x) / s2, rc); };
        const double want = fixtures::simpson(f, -12.0, a0, 8000);
        CHECK_THAT(mvn_value({{a0, a1, a2}, C}), WithinAbs(want, 1e-9));
    }
}

TEST_CASE("conditioning and lattice agree in four and five dimensions") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> lim(-1.5, 2.0);
    for (std::size_t m : {4u, 5u}) {
        const CorrMatrix C = random_corr(g, m);
        std::vector<double> a(m);
        for (double& x : a) x = lim(g);
        MvnOptions cond, lat;
        cond.method = MvnMethod::conditioning;
        lat.method = MvnMethod::lattice;
        const MvnResult x = mvn_cdf({a, C}, 1e-6, cond), y = mvn_cdf({a, C}, 1e-6, lat);
        CHECK_THAT(x.value, WithinAbs(y.value, 3.0 * y.error + 1e-7));
        CHECK(y.error >= 0.0);
    }
}

TEST_CASE("independent blocks factorize") {
    CorrMatrix C(4);
    C.set(0, 1, 0.4);
    C.set(2, 3, -0.6);
    const std::vector<double> a{0.2, -0.3, 1.1, 0.5};
    CHECK_THAT(mvn_value({a, C}), WithinAbs(bvn_cdf(0.2, -0.3, 0.4) * bvn_cdf(1.1, 0.5, -0.6), 1e-14));
}

TEST_CASE("monotone in every limit") {
    const auto C = nested_corr(0.0, {0.5, 1.0, 1.5, 2.0}, [](double t, double T) { return 0.0625 * (T - t); });
    std::vector<double> a{0.1, -0.2, 0.4, 0.0};
    const double base = mvn_value({a, C});
    for (std::size_t i = 0; i < 4; ++i) {
        auto b = a;
        b[i] += 0.05;
        CHECK(mvn_value({b, C}) > base);
    }
}

TEST_CASE("boundary slice is the partial derivative") {
    std::mt19937_64 g(13);
    std::uniform_real_distribution<double> lim(-1.5, 1.5);
    for (std::size_t m : {2u, 3u, 4u}) {
        const CorrMatrix C = random_corr(g, m);
        std::vector<double> a(m);
        for (double& x : a) x = lim(g);
        for (std::size_t i = 0; i < m; ++i) {
            const double h = 1e-4;
            auto up = a, dn = a;
            up[i] += h;
            dn[i] -= h;
            MvnOptions o;
            o.method = MvnMethod::conditioning;
            const double fd = (mvn_cdf({up, C}, 1e-10, o).value - mvn_cdf({dn, C}, 1e-10, o).value) / (2 * h);
            CHECK_THAT(mvn_boundary_slice({a, C}, i), WithinAbs(fd, 1e-7));
        }
    }
}

TEST_CASE("nested correlation and sign flip") {
    const auto C = nested_corr(0.0, {1.0, 4.0}, [](double t, double T) { return T - t; });
    CHECK_THAT(C(0, 1), WithinAbs(0.5, 1e-15));
    const auto F = flip_last_sign(C);
    CHECK(F(0, 1) == -0.5);
    const auto FF = flip_last_sign(F);
    CHECK(FF(0, 1) == C(0, 1));
    REQUIRE_NOTHROW(F.validate());
    // P(Y1 <= a, Y2 > b) = Phi(a) - P(Y1 <= a, Y2 <= b)
    CHECK_THAT(mvn_value({{0.3, -0.7}, F}), WithinAbs(norm_cdf(0.3) - mvn_value({{0.3, 0.7}, C}), 1e-14));
    CHECK_THROWS_AS(nested_corr(1.0, {1.0, 2.0}, [](double t, double T) { return T - t; }), DomainError);
}

TEST_CASE("tail split identity") {
    // 1 - N_m(d) = sum_k N_k(d_1..d_{k-1}, -d_k) with the last sign flipped.
    std::mt19937_64 g(17);
    std::normal_distribution<double> n01;
    const std::vector<double> T{0.4, 1.0, 1.3, 2.2, 3.0};
    auto var = [](double t, double u) { return 0.09 * (u - t); };
    for (std::size_t m = 2; m <= 5; ++m) {
        const std::vector<double> times(T.begin(), T.begin() + m);
        const auto C = nested_corr(0.0, times, var);
        std::vector<double> d(m);
        for (double& x : d) x = n01(g);
        double sum = 0.0;
        for (std::size_t k = 1; k <= m; ++k) {
            std::vector<double> dk(d.begin(), d.begin() + k);
            dk.back() = -dk.back();
            const auto Ck = flip_last_sign(nested_corr(0.0, std::vector<double>(times.begin(), times.begin() + k), var));
            sum += mvn_value({dk, Ck});
        }
        CHECK_THAT(1.0 - mvn_value({d, C}), WithinAbs(sum, 1e-9));
    }
}

TEST_CASE("errors") {
    CorrMatrix bad(3);
    bad.set(0, 1, 0.9);
    bad.set(0, 2, 0.9);
    bad.set(1, 2, -0.9);
    CHECK_THROWS_AS(mvn_value({{0, 0, 0}, bad}), DomainError);
    CHECK_THROWS_AS(mvn_value({{0, 0}, CorrMatrix(3)}), DomainError);
    CHECK_THROWS_AS(mvn_value({std::vector<double>(13, 0.0), CorrMatrix(13)}), DimensionError);
    MvnOptions o;
    o.max_dim = 2;
    CHECK_THROWS_AS(mvn_cdf({{0, 0, 0}, CorrMatrix(3)}, 1e-8, o), DimensionError);
    CHECK_THROWS_AS(mvn_value({{std::nan(""), 0}, CorrMatrix(2)}), DomainError);
}
