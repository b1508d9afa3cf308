#pragma once

// Constant short rate r; firm value dV/V = (r - b) dt + s_V dW.

#include <cmath>
#include <vector>

#include "bond.hpp"
#include "detail/engine.hpp"
#include "term_structure.hpp"

namespace cbond {

namespace detail {
inline ConstantDiffusion firm_dynamics(const OneFactorMarket& m) { return {m.r, m.b, m.s_V}; }

inline void check_inputs(const CouponBondSpec& s, const BarrierSchedule& K, double V) {
    s.validate();
    detail::require(K.size() == s.size(), "barrier schedule length must match the coupon schedule");
    detail::require(V > 0.0 && std::isfinite(V), "firm value must be positive");
}
}  // namespace detail

// Phi_i(t) = sum_{k>i} C_k Z(t;T_k) + F Z(t;T_N) under the constant rate.
inline double default_free_pv(const CouponBondSpec& s, const OneFactorMarket& m, double t, std::size_t i,
                              double tax = 0.0) {
    if (i >= s.size()) throw DomainError("default_free_pv: index out of range");
    if (t > s.date(i + 1)) throw DomainError("default_free_pv: t beyond T_{i+1}");
    const auto cbar = s.promised(tax);
    double pv = 0.0;
    for (std::size_t k = i + 1; k <= s.size(); ++k) pv += cbar[k - 1] * std::exp(-m.r * (s.date(k) - t));
    return pv;
}

inline double equity_price(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                           double V, double t) {
    detail::check_inputs(s, K, V);
    m.validate();
    if (t >= s.maturity()) return std::max(V - s.face - s.coupons.back(), 0.0);
    const std::size_t i = detail::interval_of(s, t);
    return detail::equity_value(detail::firm_dynamics(m), s, K, V, t, i, false).value;
}

inline BarrierSchedule solve_barriers(const CouponBondSpec& s, const OneFactorMarket& m) {
    s.validate();
    m.validate();
    return detail::solve_barriers(detail::firm_dynamics(m), s);
}

namespace detail {
inline double bond_at(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K, double V,
                      double t, double tax) {
    check_inputs(s, K, V);
    m.validate();
    const auto cbar = s.promised(tax);
    if (t >= s.maturity()) return V >= K[s.size()] ? cbar.back() : s.recovery * V;
    const std::size_t i = interval_of(s, t);
    return bond_value(firm_dynamics(m), s, K, cbar, V, t, i, false).total().value;
}
}  // namespace detail

inline double bond_price(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K, double V,
                         double t) {
    return detail::bond_at(s, m, K, V, t, 0.0);
}

// Taxed coupons, untaxed barriers. The spec's tax_rate is used.
inline double taxed_bond_price(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                               double V, double t) {
    s.validate();
    require_tax_case_one(s);
    return detail::bond_at(s, m, K, V, t, s.tax_rate);
}

inline PriceBreakdown bond_initial_breakdown(const CouponBondSpec& s, const OneFactorMarket& m,
                                             const BarrierSchedule& K, double V0) {
    detail::check_inputs(s, K, V0);
    m.validate();
    const auto p = detail::initial_parts(detail::firm_dynamics(m), s, K, s.promised(), V0);
    PriceBreakdown b;
    b.survival_pv = p.face;
    b.coupon_pv = p.coupon;
    b.expected_default_pv = p.expected;
    b.unexpected_default_pv = p.unexpected_full + p.unexpected_recovery;
    b.total = b.survival_pv + b.coupon_pv + b.expected_default_pv + b.unexpected_default_pv;
    return b;
}

// V0 minus everything the firm value ends up funding: surviving equity's
// terminal claim, recoveries, and intensity-default payments.
inline double bankruptcy_cost(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                              double V0) {
    detail::check_inputs(s, K, V0);
    m.validate();
    const auto p = detail::initial_parts(detail::firm_dynamics(m), s, K, s.promised(), V0);
    return V0 - p.asset_survival - p.expected - p.unexpected_full - p.unexpected_recovery;
}

// Weighted average time to the promised payments of the default-free bond.
inline double default_free_duration(const CouponBondSpec& s, double r, double t) {
    s.validate();
    detail::require(t < s.date(1), "default_free_duration: t must precede the first coupon date");
    const auto cbar = s.promised();
    double pv = 0.0, tw = 0.0;
    for (std::size_t k = 1; k <= s.size(); ++k) {
        const double v = cbar[k - 1] * std::exp(-r * (s.date(k) - t));
        pv += v;
        tw += v * (s.date(k) - t);
    }
    detail::require(pv > 0.0, "default_free_duration: no promised cash flows");
    return tw / pv;
}

struct DurationReport {
    double duration = 0.0;         // -dB0/dr with barriers moving with r
    double fixed_barriers = 0.0;   // -dB0/dr holding K_1..K_{N-1} fixed
    double price = 0.0;
};

inline DurationReport duration_report(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                                      double V0) {
    detail::check_inputs(s, K, V0);
    m.validate();
    const auto dyn = detail::firm_dynamics(m);
    const detail::Sens b = detail::bond_value(dyn, s, K, s.promised(), V0, 0.0, 0, true).total();
    if (!(b.value > 0.0)) throw DomainError("duration: bond price is zero");
    const auto kappa = detail::barrier_rate_sens(dyn, s, K);
    double total = b.d_rate;
    for (std::size_t l = 0; l < kappa.size(); ++l) total += b.d_logK[l] * kappa[l];
    return {-total / b.value, -b.d_rate / b.value, b.value};
}

inline double duration(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K, double V0) {
    return duration_report(s, m, K, V0).duration;
}

}  // namespace cbond
