#pragma once

// Higher-order asset and bond binaries on a lognormal underlying observed at
// discrete dates. With d_i^± = [ln(x/K_i) + mu_i ± nu_i/2] / sqrt(nu_i):
//   bond  : D(t,T_m) N_m(s_1 d_1^-, ..., s_m d_m^-; A^s)
//   asset : x e^{-q(T_m-t)} N_m(s_1 d_1^+, ..., s_m d_m^+; A^s)
// where A^s_ij = s_i s_j sqrt(nu_i/nu_j) for i <= j.

#include <cmath>
#include <functional>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "mvn.hpp"
#include "term_structure.hpp"

namespace cbond {

enum class BinaryKind { asset, bond };

struct BinaryOrder {
    BinaryKind kind = BinaryKind::bond;
    std::vector<int> signs;          // +1 / -1
    std::vector<double> barriers;
    std::vector<double> obs_times;   // payout at obs_times.back()
};

// Constant r, q, sigma (one-factor firm value).
struct ConstantDiffusion {
    double r = 0.0, q = 0.0, sigma = 0.0;

    double variance(double t, double T) const { return sigma * sigma * (T - t); }
    double drift(double t, double T) const { return (r - q) * (T - t); }
    double drift_rate_sens(double t, double T) const { return T - t; }
    double discount(double t, double T) const { return std::exp(-r * (T - t)); }
    double discount_rate_sens(double t, double T) const { return -(T - t); }  // d ln D / dr
    double payout(double t, double T) const { return std::exp(-q * (T - t)); }
};

// Zero rate, dividend q, deterministic volatility given by its accumulated variance.
struct DeterministicVolDiffusion {
    double q = 0.0;
    std::function<double(double, double)> accumulated;

    double variance(double t, double T) const { return accumulated(t, T); }
    double drift(double t, double T) const { return -q * (T - t); }
    double drift_rate_sens(double, double) const { return 0.0; }
    double discount(double, double) const { return 1.0; }
    double discount_rate_sens(double, double) const { return 0.0; }
    double payout(double t, double T) const { return std::exp(-q * (T - t)); }
};

// The two-factor relative price x = V/Z(r,t;T_ref): S_x-volatility, dividend b.
struct RelativePriceDiffusion {
    const VasicekMarket* market = nullptr;
    double T_ref = 0.0;

    double variance(double t, double T) const { return accumulated_variance(*market, t, T, T_ref); }
    double drift(double t, double T) const { return -market->b * (T - t); }
    double drift_rate_sens(double, double) const { return 0.0; }
    double discount(double, double) const { return 1.0; }
    double discount_rate_sens(double, double) const { return 0.0; }
    double payout(double t, double T) const { return std::exp(-market->b * (T - t)); }
};

using DiffusionSpec = std::variant<ConstantDiffusion, DeterministicVolDiffusion>;

namespace detail {

struct Coord {
    double time;
    double barrier;  // 0 allowed with sign +1 (coordinate certain)
    int sign;
};

// A binary price and its partials in ln x, the model rate (through mu and D),
// and ln K_j of each coordinate.
struct BinaryValue {
    double value = 0.0;
    double d_logx = 0.0;
    double d_rate = 0.0;
    std::vector<double> d_logK;
};

template <class Dyn>
BinaryValue binary_term(const Dyn& dyn, BinaryKind kind, double x, double t,
                        const std::vector<Coord>& coords, bool sens) {
    const std::size_t m = coords.size();
    BinaryValue out;
    out.d_logK.assign(m, 0.0);
    const double Tm = coords.back().time;
    const double pref = kind == BinaryKind::bond ? dyn.discount(t, Tm) : x * dyn.payout(t, Tm);
    const double half = kind == BinaryKind::bond ? -0.5 : 0.5;
    const double lx = std::log(x);

    MvnProblem prob{std::vector<double>(m), CorrMatrix(m)};
    std::vector<double> nu(m), root(m), dmu(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Coord& c = coords[j];
        nu[j] = dyn.variance(t, c.time);
        root[j] = std::sqrt(nu[j]);
        dmu[j] = dyn.drift_rate_sens(t, c.time);
        if (c.barrier <= 0.0) {
            if (c.sign < 0) return out;  // x below zero: impossible
            prob.limits[j] = kInf;
            continue;
        }
        const double d = (lx - std::log(c.barrier) + dyn.drift(t, c.time) + half * nu[j]) / root[j];
        prob.limits[j] = c.sign * d;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            prob.corr.set(i, j, coords[i].sign * coords[j].sign * std::sqrt(nu[i] / nu[j]));

    const double N = mvn_cdf(prob).value;
    out.value = pref * N;
    if (!sens) return out;

    if (kind == BinaryKind::asset) out.d_logx = out.value;
    else out.d_rate = out.value * dyn.discount_rate_sens(t, Tm);
    for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(prob.limits[j])) continue;
        const double slice = mvn_boundary_slice(prob, j) * coords[j].sign / root[j];
        out.d_logx += pref * slice;
        out.d_rate += pref * slice * dmu[j];
        out.d_logK[j] = -pref * slice;
    }
    return out;
}

inline std::vector<Coord> coords_of(const BinaryOrder& o) {
    const std::size_t m = o.obs_times.size();
    detail::require(m >= 1, "binary: need at least one observation date");
    detail::require(o.signs.size() == m && o.barriers.size() == m,
                    "binary: signs, barriers and dates must have equal length");
    std::vector<Coord> c(m);
    for (std::size_t j = 0; j < m; ++j) {
        detail::require(o.signs[j] == 1 || o.signs[j] == -1, "binary: signs must be +1 or -1");
        detail::require(o.barriers[j] > 0.0 || (o.barriers[j] == 0.0 && o.signs[j] == 1),
                        "binary: barriers must be positive (zero only with sign +)");
        if (j > 0) detail::require(o.obs_times[j] > o.obs_times[j - 1], "binary: dates must ascend");
        c[j] = {o.obs_times[j], o.barriers[j], o.signs[j]};
    }
    return c;
}

}  // namespace detail

inline double binary_price(const BinaryOrder& order, const DiffusionSpec& spec, double x, double t) {
    const auto coords = detail::coords_of(order);
    detail::require(x > 0.0 && std::isfinite(x), "binary: underlying must be positive");
    detail::require(t < order.obs_times.front(), "binary: valuation time must precede the first date");
    return std::visit(
        [&](const auto& dyn) {
            if constexpr (std::is_same_v<std::decay_t<decltype(dyn)>, ConstantDiffusion>)
                detail::require(dyn.sigma > 0.0, "binary: sigma must be positive");
            return detail::binary_term(dyn, order.kind, x, t, coords, false).value;
        },
        spec);
}

}  // namespace cbond
