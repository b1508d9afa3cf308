#include <catch_amalgamated.hpp>

#include <cmath>

#include "cbond/cbond.hpp"
#include "fixtures.hpp"

using namespace cbond;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

VasicekMarket market(double a1, double a2, double s_r, double rho = 0.0, double s_V = 0.2) {
    VasicekMarket m;
    m.a1 = a1;
    m.a2 = a2;
    m.s_r = s_r;
    m.rho = rho;
    m.s_V = PiecewiseConstant(s_V);
    return m;
}

}  // namespace

TEST_CASE("zero-coupon examples") {
    const auto m = market(0.0, 0.1, 0.0);
    CHECK_THAT(zcb_coeffs(m, 0.0, 0.5).B, WithinAbs((1 - std::exp(-0.05)) / 0.1, 1e-15));
    CHECK_THAT(zcb_coeffs(m, 0.0, 0.5).B, WithinAbs(0.4877057549928599, 1e-13));
    CHECK(zcb_price(m, 0.05, 1.0, 1.0) == 1.0);
    // a2 -> 0: B -> tau
    const auto flat = market(0.0, 0.0, 0.0);
    CHECK_THAT(zcb_coeffs(flat, 0.0, 2.0).B, WithinAbs(2.0, 1e-15));
    CHECK_THAT(zcb_price(flat, 0.05, 0.0, 2.0), WithinAbs(std::exp(-0.1), 1e-15));
}

TEST_CASE("small mean reversion series branch is continuous") {
    for (double tau : {0.5, 2.0, 10.0}) {
        const auto lo = market(0.01, 0.999e-3 / tau, 0.02), hi = market(0.01, 1.001e-3 / tau, 0.02);
        CHECK_THAT(zcb_coeffs(lo, 0, tau).A, WithinRel(zcb_coeffs(hi, 0, tau).A, 1e-5));
        CHECK_THAT(zcb_coeffs(lo, 0, tau).B, WithinRel(zcb_coeffs(hi, 0, tau).B, 1e-5));
    }
}

TEST_CASE("A matches its defining integral") {
    const auto m = market(0.004, 0.15, 0.012);
    const double T = 3.0;
    auto B = [&](double u) { return (1 - std::exp(-m.a2 * (T - u))) / m.a2; };
    const double want =
        -fixtures::simpson([&](double u) { return m.a1 * B(u) - 0.5 * m.s_r * m.s_r * B(u) * B(u); }, 0.5, T, 2000);
    CHECK_THAT(zcb_coeffs(m, 0.5, T).A, WithinAbs(want, 1e-13));
}

TEST_CASE("bond price solves the term-structure PDE") {
    // Z_t + (a1 - a2 r) Z_r + s_r^2/2 Z_rr - r Z = 0
    const auto m = market(0.006, 0.2, 0.015);
    const double T = 2.5, h = 1e-4;
    for (double r : {-0.01, 0.03, 0.08})
        for (double t : {0.0, 1.0, 2.0}) {
            auto Z = [&](double rr, double tt) { return zcb_price(m, rr, tt, T); };
            const double Zt = (Z(r, t + h) - Z(r, t - h)) / (2 * h);
            const double Zr = (Z(r + h, t) - Z(r - h, t)) / (2 * h);
            const double Zrr = (Z(r + h, t) - 2 * Z(r, t) + Z(r - h, t)) / (h * h);
            const double res = Zt + (m.a1 - m.a2 * r) * Zr + 0.5 * m.s_r * m.s_r * Zrr - r * Z(r, t);
            CHECK(std::abs(res) < 1e-6);
            CHECK_THAT(-Zr / Z(r, t), WithinAbs(zcb_coeffs(m, t, T).B, 1e-7));
        }
}

TEST_CASE("relative-price variance") {
    auto m = market(0.0, 0.1, 0.01, -0.3, 0.25);
    const double T = 2.0;
    // at maturity only s_V remains
    CHECK_THAT(sx_squared(m, T, T), WithinAbs(0.0625, 1e-15));
    const double Bv = (1 - std::exp(-0.1 * 2.0)) / 0.1;
    CHECK_THAT(sx_squared(m, 0.0, T), WithinAbs(0.0625 - 2 * 0.3 * 0.25 * 0.01 * Bv + 1e-4 * Bv * Bv, 1e-15));

    m.s_V = PiecewiseConstant({0.7, 1.3}, {0.2, 0.35, 0.25});
    for (auto [a, b] : {std::pair{0.0, 0.5}, {0.2, 1.0}, {0.0, 2.0}, {0.9, 1.1}}) {
        // step function: integrate piece by piece
        double want = 0.0, lo = a;
        for (double br : {0.7, 1.3, 2.0}) {
            const double hi = std::min(br, b);
            if (hi > lo) {
                const double sv = m.s_V(0.5 * (lo + hi));
                auto sx2 = [&](double t) {
                    const double B = (1 - std::exp(-m.a2 * (T - t))) / m.a2;
                    return sv * sv + 2 * m.rho * sv * m.s_r * B + m.s_r * m.s_r * B * B;
                };
                want += fixtures::simpson(sx2, lo, hi, 2000);
            }
            lo = std::max(lo, hi);
        }
        CHECK_THAT(accumulated_variance(m, a, b, T), WithinAbs(want, 1e-12));
    }
    CHECK_THAT(accumulated_variance(m, 0.0, 1.0, T) + accumulated_variance(m, 1.0, 2.0, T),
               WithinAbs(accumulated_variance(m, 0.0, 2.0, T), 1e-14));
    CHECK(accumulated_variance(m, 0.4, 0.4, T) == 0.0);
    CHECK_THROWS_AS(accumulated_variance(m, 1.0, 0.5, T), DomainError);
}

TEST_CASE("default-free coupon bond values") {
    const auto s = fixtures::benchmark_bond();
    OneFactorMarket flat{0.0, 0.0, 0.2};
    CHECK_THAT(default_free_pv(s, flat, 0.0, 0), WithinAbs(112.0, 1e-12));
    OneFactorMarket r5{0.05, 0.0, 0.2};
    double want = 0.0;
    for (double T : {0.5, 1.0, 1.5, 2.0}) want += 3.0 * std::exp(-0.05 * T);
    want += 100.0 * std::exp(-0.1);
    CHECK_THAT(default_free_pv(s, r5, 0.0, 0), WithinAbs(want, 1e-12));
    CHECK_THAT(default_free_pv(s, r5, 1.8, 3), WithinAbs(103.0 * std::exp(-0.01), 1e-12));
    CHECK_THAT(default_free_pv(s, fixtures::benchmark_vasicek(), 2), WithinAbs(106.0, 1e-15));
    CHECK_THROWS_AS(default_free_pv(s, r5, 0.0, 4), DomainError);
}

TEST_CASE("market validation") {
    auto m = market(0.0, 0.1, 0.01);
    m.rho = 1.5;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = market(0.0, 0.1, 0.01);
    m.s_V = PiecewiseConstant({1.0}, {0.2});
    CHECK_THROWS_AS(m.validate(), DomainError);
    OneFactorMarket o{0.05, 0.0, 0.0};
    CHECK_THROWS_AS(o.validate(), DomainError);
}
