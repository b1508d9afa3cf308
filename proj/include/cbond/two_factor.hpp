#pragma once

// Vasicek short rate with correlated firm value. Everything is priced in
// units of the maturity zero-coupon bond Z(r,t;T_N): the relative price
// x = V/Z has zero drift rate, dividend b and volatility S_x(t), and all
// cash flows are fixed amounts of Z (coupon C_i pays C_i Z(r,T_i;T_N)).

#include <cmath>

#include "bond.hpp"
#include "detail/engine.hpp"
#include "term_structure.hpp"

namespace cbond {

namespace detail {
inline RelativePriceDiffusion relative_dynamics(const VasicekMarket& m, const CouponBondSpec& s) {
    return {&m, s.maturity()};
}
inline void check_inputs_2f(const CouponBondSpec& s, const VasicekMarket& m, double r) {
    s.validate();
    m.validate();
    require(std::isfinite(r), "short rate must be finite");
}
}  // namespace detail

// Phi_i = sum_{k>i} cbar_k, in units of Z(r,t;T_N).
inline double default_free_pv(const CouponBondSpec& s, const VasicekMarket&, std::size_t i, double tax = 0.0) {
    if (i >= s.size()) throw DomainError("default_free_pv: index out of range");
    const auto cbar = s.promised(tax);
    double pv = 0.0;
    for (std::size_t k = i + 1; k <= s.size(); ++k) pv += cbar[k - 1];
    return pv;
}

inline BarrierSchedule solve_barriers_2f(const CouponBondSpec& s, const VasicekMarket& m) {
    s.validate();
    m.validate();
    return detail::solve_barriers(detail::relative_dynamics(m, s), s);
}

// Relative prices e_i(x,t), u_i(x,t).
inline double equity_relative(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double x,
                              double t) {
    detail::require(x > 0.0, "relative price must be positive");
    if (t >= s.maturity()) return std::max(x - s.face - s.coupons.back(), 0.0);
    return detail::equity_value(detail::relative_dynamics(m, s), s, K, x, t, detail::interval_of(s, t), false)
        .value;
}

inline double bond_relative(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double x,
                            double t, double tax = 0.0) {
    detail::require(x > 0.0, "relative price must be positive");
    const auto cbar = s.promised(tax);
    if (t >= s.maturity()) return x >= K[s.size()] ? cbar.back() : s.recovery * x;
    return detail::bond_value(detail::relative_dynamics(m, s), s, K, cbar, x, t, detail::interval_of(s, t), false)
        .total()
        .value;
}

inline double equity_price_2f(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double V,
                              double r, double t) {
    detail::check_inputs_2f(s, m, r);
    detail::require(V > 0.0, "firm value must be positive");
    const double Z = zcb_price(m, r, std::min(t, s.maturity()), s.maturity());
    return Z * equity_relative(s, m, K, V / Z, t);
}

inline double bond_price_2f(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double V,
                            double r, double t) {
    detail::check_inputs_2f(s, m, r);
    detail::require(V > 0.0, "firm value must be positive");
    const double Z = zcb_price(m, r, std::min(t, s.maturity()), s.maturity());
    return Z * bond_relative(s, m, K, V / Z, t);
}

inline double taxed_bond_price_2f(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K,
                                  double V, double r, double t) {
    detail::check_inputs_2f(s, m, r);
    require_tax_case_one(s);
    detail::require(V > 0.0, "firm value must be positive");
    const double Z = zcb_price(m, r, std::min(t, s.maturity()), s.maturity());
    return Z * bond_relative(s, m, K, V / Z, t, s.tax_rate);
}

inline PriceBreakdown bond_initial_breakdown_2f(const CouponBondSpec& s, const VasicekMarket& m,
                                                const BarrierSchedule& K, double V0, double r0) {
    detail::check_inputs_2f(s, m, r0);
    const double Z0 = zcb_price(m, r0, 0.0, s.maturity());
    const auto p = detail::initial_parts(detail::relative_dynamics(m, s), s, K, s.promised(), V0 / Z0);
    PriceBreakdown b;
    b.survival_pv = Z0 * p.face;
    b.coupon_pv = Z0 * p.coupon;
    b.expected_default_pv = Z0 * p.expected;
    b.unexpected_default_pv = Z0 * (p.unexpected_full + p.unexpected_recovery);
    b.total = b.survival_pv + b.coupon_pv + b.expected_default_pv + b.unexpected_default_pv;
    return b;
}

inline double bankruptcy_cost_2f(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K,
                                 double V0, double r0) {
    detail::check_inputs_2f(s, m, r0);
    const double Z0 = zcb_price(m, r0, 0.0, s.maturity());
    const auto p = detail::initial_parts(detail::relative_dynamics(m, s), s, K, s.promised(), V0 / Z0);
    return V0 - Z0 * (p.asset_survival + p.expected + p.unexpected_full + p.unexpected_recovery);
}

struct Duration2f {
    double duration = 0.0;
    double zcb_duration = 0.0;  // B(0,T)
    bool prop1_condition = false;  // sufficient condition for duration <= B(0,T)
    double price = 0.0;
};

// B0 = Z0 f1 + delta V0 f2 and -dB0/dr = B(0,T)(Z0 f1 - Z0 f1~ - delta V0 f2~),
// where f~ = d f / d ln x (since d ln x / dr = B(0,T)).
inline Duration2f duration_2f(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double V0,
                              double r0) {
    detail::check_inputs_2f(s, m, r0);
    const ZcbCoeffs zc = zcb_coeffs(m, 0.0, s.maturity());
    const double Z0 = std::exp(zc.A - zc.B * r0), x0 = V0 / Z0;
    const auto parts =
        detail::bond_value(detail::relative_dynamics(m, s), s, K, s.promised(), x0, 0.0, 0, true);
    const detail::Sens u = parts.total();
    if (!(u.value > 0.0)) throw DomainError("duration: bond price is zero");

    detail::Sens f1 = parts.face;  // Z0 f1 = Z0 * (this)
    f1.add(1.0, parts.coupon);
    f1.add(1.0, parts.unexpected_full);
    detail::Sens rec = parts.expected;  // delta V0 f2 = Z0 * (this)
    rec.add(1.0, parts.unexpected_recovery);

    Duration2f d;
    d.zcb_duration = zc.B;
    d.price = Z0 * u.value;
    d.duration = zc.B * (1.0 - u.d_logx / u.value);
    // delta V0 (f2~ + f2) + Z0 f1~ >= 0, the condition multiplied through by delta V0.
    d.prop1_condition = Z0 * (rec.d_logx + f1.d_logx) >= 0.0;
    return d;
}

}  // namespace cbond
