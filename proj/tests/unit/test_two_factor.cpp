#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cbond/cbond.hpp"
#include "fixtures.hpp"

using namespace cbond;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

VasicekMarket frozen_rate(double s_V, double b = 0.0) {
    VasicekMarket m;
    m.s_V = PiecewiseConstant(s_V);
    m.b = b;
    return m;
}

}  // namespace

TEST_CASE("terminal payoff") {
    auto s = fixtures::benchmark_bond();
    s.coupons = {5, 5, 5, 5};
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    CHECK(equity_price_2f(s, m, K, 200.0, 0.05, 2.0) == 95.0);
    CHECK(bond_price_2f(s, m, K, 200.0, 0.05, 2.0) == 105.0);
}

TEST_CASE("frozen rate reduces to the one-factor model") {
    // s_r = 0 and a1 = a2 = 0 keep r at r0 forever. A two-factor coupon C pays
    // C Z(T_i;T_N), so it matches a one-factor coupon C e^{-r (T_N - T_i)}.
    const auto s2 = fixtures::benchmark_bond();
    auto s1 = s2;
    for (std::size_t i = 1; i <= 4; ++i) s1.coupons[i - 1] *= std::exp(-0.05 * (2.0 - s2.date(i)));
    const auto m2 = frozen_rate(0.25, 0.01);
    const OneFactorMarket m1{0.05, 0.01, 0.25};
    const auto K1 = solve_barriers(s1, m1);
    const auto K2 = solve_barriers_2f(s2, m2);
    for (std::size_t i = 1; i <= 4; ++i)
        CHECK_THAT(K2[i] * std::exp(-0.05 * (2.0 - s2.date(i))), WithinRel(K1[i], 1e-9));
    CHECK_THAT(bond_price_2f(s2, m2, K2, 150.0, 0.05, 0.0), WithinRel(bond_price(s1, m1, K1, 150.0, 0.0), 1e-9));
    CHECK_THAT(equity_price_2f(s2, m2, K2, 150.0, 0.05, 0.0), WithinRel(equity_price(s1, m1, K1, 150.0, 0.0), 1e-9));
}

TEST_CASE("Merton reduction") {
    CouponBondSpec s;
    s.face = 80.0;
    s.dates = {1.0};
    s.coupons = {0.0};
    s.recovery = 0.0;
    s.intensities = {0.0};
    const auto m = frozen_rate(0.2);
    const auto K = solve_barriers_2f(s, m);
    const double V = 100.0, r = 0.05, T = 1.0, sig = 0.2;
    const double d1 = (std::log(V / 80.0) + (r + 0.5 * sig * sig) * T) / sig, d2 = d1 - sig;
    CHECK_THAT(equity_price_2f(s, m, K, V, r, 0.0),
               WithinRel(V * norm_cdf(d1) - 80.0 * std::exp(-r) * norm_cdf(d2), 1e-10));
    CHECK_THAT(bond_price_2f(s, m, K, V, r, 0.0), WithinRel(80.0 * std::exp(-r) * norm_cdf(d2), 1e-10));
}

TEST_CASE("numeraire invariance") {
    const auto s = fixtures::benchmark_bond();
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    const double t = 0.3;
    const double Za = zcb_price(m, 0.02, t, 2.0), Zb = zcb_price(m, 0.09, t, 2.0);
    const double x = 140.0;
    CHECK_THAT(equity_price_2f(s, m, K, x * Za, 0.02, t) / Za,
               WithinRel(equity_price_2f(s, m, K, x * Zb, 0.09, t) / Zb, 1e-12));
    CHECK_THAT(bond_price_2f(s, m, K, x * Za, 0.02, t) / Za,
               WithinRel(bond_price_2f(s, m, K, x * Zb, 0.09, t) / Zb, 1e-12));
    CHECK_THAT(bond_relative(s, m, K, x, t), WithinRel(bond_price_2f(s, m, K, x * Za, 0.02, t) / Za, 1e-12));
}

TEST_CASE("barriers") {
    auto s = fixtures::benchmark_bond();
    s.coupons = {3.0, 4.0, 0.0, 2.0};
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    CHECK(K[4] == 102.0);
    CHECK(K[3] == 0.0);
    for (std::size_t i : {1u, 2u}) {
        const double res = equity_relative(s, m, K, K[i], s.date(i)) - s.coupon(i);
        CHECK(std::abs(res) < 1e-8 * std::max(s.coupon(i), 1.0));
    }
}

TEST_CASE("relative prices: shape in x") {
    const auto s = fixtures::benchmark_bond();
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    const double t = 1.6;  // last interval: u_{N-1}
    double prev_u = 0.0;
    for (double x = 40.0; x <= 300.0; x += 10.0) {
        const double u = bond_relative(s, m, K, x, t);
        CHECK(u > prev_u);
        prev_u = u;
        const double h = 1e-3 * x;
        const double e0 = equity_relative(s, m, K, x - h, 0.2), e1 = equity_relative(s, m, K, x, 0.2),
                     e2 = equity_relative(s, m, K, x + h, 0.2);
        const double slope = (e2 - e0) / (2 * h);
        CHECK(slope > 0.0);
        CHECK(slope < 1.0);
        CHECK(e2 - 2 * e1 + e0 > -1e-10);
    }
}

TEST_CASE("breakdown, bankruptcy cost and identity") {
    const auto s = fixtures::benchmark_bond();
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    const double B0 = bond_price_2f(s, m, K, 150.0, 0.05, 0.0), E0 = equity_price_2f(s, m, K, 150.0, 0.05, 0.0);
    const auto b = bond_initial_breakdown_2f(s, m, K, 150.0, 0.05);
    CHECK_THAT(b.total, WithinRel(B0, 1e-10));
    CHECK_THAT(E0 + B0 + bankruptcy_cost_2f(s, m, K, 150.0, 0.05), WithinRel(150.0, 1e-8));
    CHECK_THAT(B0, WithinRel(93.0955230, 1e-8));

    auto mm = s;
    mm.recovery = 1.0;
    mm.intensities = {0, 0, 0, 0};
    auto m0 = m;
    m0.b = 0.0;
    CHECK(std::abs(bankruptcy_cost_2f(mm, m0, solve_barriers_2f(mm, m0), 150.0, 0.05)) < 1e-8 * 150.0);
}

TEST_CASE("two-factor taxes") {
    auto s = fixtures::benchmark_bond();
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    CHECK_THAT(taxed_bond_price_2f(s, m, K, 150.0, 0.05, 0.0), WithinAbs(bond_price_2f(s, m, K, 150.0, 0.05, 0.0), 1e-12));
    double prev = INFINITY;
    for (int k = 0; k <= 5; ++k) {
        s.tax_rate = 0.1 * k;
        const double B = taxed_bond_price_2f(s, m, K, 150.0, 0.05, 0.0);
        CHECK(B <= prev);
        prev = B;
    }
    s.recovery = 1.0;
    s.tax_rate = 0.3;
    CHECK_THROWS_AS(taxed_bond_price_2f(s, m, K, 150.0, 0.05, 0.0), UnsupportedCaseError);
}

TEST_CASE("two-factor duration") {
    const auto s = fixtures::benchmark_bond();
    const auto m = fixtures::benchmark_vasicek();
    const auto K = solve_barriers_2f(s, m);
    const auto d = duration_2f(s, m, K, 150.0, 0.05);
    const double h = 1e-5;
    auto price = [&](double r) { return bond_price_2f(s, m, K, 150.0, r, 0.0); };
    const double fd = -(price(0.05 + h) - price(0.05 - h)) / (2 * h) / price(0.05);
    CHECK_THAT(d.duration, WithinRel(fd, 1e-4));
    CHECK_THAT(d.zcb_duration, WithinAbs((1 - std::exp(-0.2)) / 0.1, 1e-14));
    if (d.prop1_condition) CHECK(d.duration <= d.zcb_duration);

    // default-free limit
    auto z = s;
    z.intensities = {0, 0, 0, 0};
    const auto dz = duration_2f(z, m, solve_barriers_2f(z, m), 1e8, 0.05);
    CHECK_THAT(dz.duration, WithinAbs(dz.zcb_duration, 1e-8));
}
