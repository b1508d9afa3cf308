#pragma once

#include <cmath>
#include <random>

#include "cbond/cbond.hpp"

namespace fixtures {

// F=100, semiannual C=3 over two years, delta=0.5, lambda=(.02,.02,.03,.03).
inline cbond::CouponBondSpec benchmark_bond() {
    cbond::CouponBondSpec s;
    s.face = 100.0;
    s.dates = {0.5, 1.0, 1.5, 2.0};
    s.coupons = {3.0, 3.0, 3.0, 3.0};
    s.recovery = 0.5;
    s.intensities = {0.02, 0.02, 0.03, 0.03};
    return s;
}

inline cbond::OneFactorMarket benchmark_market() { return {0.05, 0.01, 0.25}; }

inline cbond::VasicekMarket benchmark_vasicek() {
    cbond::VasicekMarket m;
    m.a1 = 0.005;
    m.a2 = 0.1;
    m.s_r = 0.01;
    m.rho = -0.3;
    m.s_V = cbond::PiecewiseConstant(0.25);
    m.b = 0.01;
    return m;
}

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Random valid bond: 1..max_n coupon dates, moderate leverage.
inline cbond::CouponBondSpec random_bond(std::mt19937_64& g, std::size_t max_n = 4) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    cbond::CouponBondSpec s;
    const std::size_t n = 1 + static_cast<std::size_t>(u(g) * max_n) % max_n;
    s.face = 50.0 + 100.0 * u(g);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t += 0.25 + 0.75 * u(g);
        s.dates.push_back(t);
        s.coupons.push_back(s.face * (0.01 + 0.05 * u(g)));
        s.intensities.push_back(0.05 * u(g));
    }
    s.recovery = 0.8 * u(g);
    return s;
}

}  // namespace fixtures
