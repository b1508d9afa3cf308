#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace cbond {

struct OneFactorMarket {
    double r = 0.0;    // short rate
    double b = 0.0;    // payout rate
    double s_V = 0.0;  // firm-value volatility

    void validate() const {
        detail::require(std::isfinite(r), "market.r must be finite");
        detail::require(b >= 0.0 && std::isfinite(b), "market.b must be >= 0");
        detail::require(s_V > 0.0 && std::isfinite(s_V), "market.s_V must be > 0");
    }
};

// Right-continuous step function: values[k] applies on [breaks[k-1], breaks[k]),
// with breaks[-1] = -inf and the last value extending to +inf.
struct PiecewiseConstant {
    std::vector<double> breaks;
    std::vector<double> values;

    PiecewiseConstant() = default;
    PiecewiseConstant(double v) : values{v} {}  // NOLINT: a constant is a step function
    PiecewiseConstant(std::vector<double> br, std::vector<double> v)
        : breaks(std::move(br)), values(std::move(v)) {}

    double operator()(double t) const {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        return values[static_cast<std::size_t>(it - breaks.begin())];
    }

    void validate(const char* name) const {
        detail::require(!values.empty() && values.size() == breaks.size() + 1,
                        std::string(name) + ": need one more value than breakpoints");
        for (std::size_t i = 1; i < breaks.size(); ++i)
            detail::require(breaks[i] > breaks[i - 1],
                            std::string(name) + ": breakpoints must be ascending");
    }
};

struct VasicekMarket {
    double a1 = 0.0;   // dr = (a1 - a2 r) dt + s_r dW_1
    double a2 = 0.0;
    double s_r = 0.0;
    double rho = 0.0;  // corr(dW_1, dW_2)
    PiecewiseConstant s_V{0.0};
    double b = 0.0;

    void validate() const {
        detail::require(std::isfinite(a1), "market.a1 must be finite");
        detail::require(a2 >= 0.0 && std::isfinite(a2), "market.a2 must be >= 0");
        detail::require(s_r >= 0.0 && std::isfinite(s_r), "market.s_r must be >= 0");
        detail::require(std::abs(rho) <= 1.0, "market.rho must lie in [-1, 1]");
        detail::require(b >= 0.0 && std::isfinite(b), "market.b must be >= 0");
        s_V.validate("market.s_V");
        for (double v : s_V.values) detail::require(v > 0.0 && std::isfinite(v), "market.s_V must be > 0");
    }
};

namespace detail {

// B(tau) = (1 - e^{-a tau})/a and its first two antiderivatives in tau:
//   F1(tau) = int_0^tau B,  F2(tau) = int_0^tau B^2.
struct VasicekKernel {
    double a;

    double B(double tau) const {
        const double x = a * tau;
        if (x < 1e-6) return tau * (1.0 - x / 2.0 + x * x / 6.0);
        return -std::expm1(-x) / a;
    }
    double F1(double tau) const {
        const double x = a * tau;
        if (x < 1e-3)
            return tau * tau * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0);
        return (tau - B(tau)) / a;
    }
    double F2(double tau) const {
        const double x = a * tau;
        if (x < 1e-3)
            return tau * tau * tau *
                   (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0 - x * x * x / 24.0 + 31.0 * x * x * x * x / 2520.0);
        const double B2 = -std::expm1(-2.0 * x) / (2.0 * a);
        return (tau - 2.0 * B(tau) + B2) / (a * a);
    }
};

}  // namespace detail

struct ZcbCoeffs {
    double A = 0.0;
    double B = 0.0;
};

// Z(r,t;T) = exp(A - B r) with A = -int_t^T [a1 B(u,T) - s_r^2 B(u,T)^2 / 2] du.
inline ZcbCoeffs zcb_coeffs(const VasicekMarket& m, double t, double T) {
    if (t > T) throw DomainError("zcb_coeffs: t > T");
    const double tau = T - t;
    detail::VasicekKernel k{m.a2};
    return {-m.a1 * k.F1(tau) + 0.5 * m.s_r * m.s_r * k.F2(tau), k.B(tau)};
}

inline double zcb_price(const VasicekMarket& m, double r, double t, double T) {
    const ZcbCoeffs c = zcb_coeffs(m, t, T);
    return std::exp(c.A - c.B * r);
}

inline double sx_squared(const VasicekMarket& m, double t, double T_ref) {
    const double B = detail::VasicekKernel{m.a2}.B(std::max(0.0, T_ref - t));
    const double sv = m.s_V(t), sr = m.s_r;
    return sv * sv + 2.0 * m.rho * sv * sr * B + sr * sr * B * B;
}

inline double accumulated_variance(const VasicekMarket& m, double t1, double t2, double T_ref) {
    if (!(t1 <= t2 && t2 <= T_ref)) throw DomainError("accumulated_variance: need t1 <= t2 <= T_ref");
    if (t1 == t2) return 0.0;
    detail::VasicekKernel k{m.a2};
    double total = 0.0, lo = t1;
    auto it = std::upper_bound(m.s_V.breaks.begin(), m.s_V.breaks.end(), t1);
    while (lo < t2) {
        const double hi = (it != m.s_V.breaks.end()) ? std::min(*it, t2) : t2;
        const double sv = m.s_V(lo), sr = m.s_r;
        const double v_lo = T_ref - lo, v_hi = T_ref - hi;
        total += sv * sv * (hi - lo) + 2.0 * m.rho * sv * sr * (k.F1(v_lo) - k.F1(v_hi)) +
                 sr * sr * (k.F2(v_lo) - k.F2(v_hi));
        lo = hi;
        if (it != m.s_V.breaks.end()) ++it;
    }
    return total;
}

}  // namespace cbond
