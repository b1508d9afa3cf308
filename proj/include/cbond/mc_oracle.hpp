#pragma once

// Monte Carlo reference pricer. Paths are simulated exactly between event
// dates (coupon dates, volatility breakpoints, the Poisson default time);
// every path owns its random stream, and per-block partial sums are reduced
// in block order, so results do not depend on the number of worker threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "bond.hpp"
#include "term_structure.hpp"

namespace cbond {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    unsigned substeps_per_interval = 0;  // two-factor: >0 switches to an Euler scheme
    unsigned threads = 0;                // 0: hardware concurrency
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

struct McReport {
    McEstimate bond;             // uses spec.tax_rate on coupons
    McEstimate equity;
    McEstimate bankruptcy_cost;  // dividends-adjusted firm value less equity and untaxed debt
    McEstimate firm_value;       // equity + untaxed debt + bankruptcy cost, per path
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct PathRng {
    std::mt19937_64 eng;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::uniform_real_distribution<double> unif{0.0, 1.0};

    PathRng(std::uint64_t seed, std::uint64_t path) : eng(splitmix64(seed ^ splitmix64(path))) {}
    double z() { return normal(eng); }
    double exp1() { return -std::log1p(-unif(eng)); }
};

// Unexpected default time: invert the piecewise-linear cumulative hazard.
inline double sample_default_time(const CouponBondSpec& s, PathRng& rng) {
    double e = rng.exp1();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double len = s.date(k + 1) - s.date(k), lam = s.intensities[k];
        if (lam * len >= e) return s.date(k) + e / lam;
        e -= lam * len;
    }
    return INFINITY;
}

struct PathOutcome {
    double bond = 0, equity = 0, bond_untaxed = 0, cost = 0;
};

constexpr std::size_t kBlock = 1024;

template <class PathFn>
McReport run_paths(const SimConfig& cfg, PathFn&& path) {
    const std::size_t n = cfg.n_paths, blocks = (n + kBlock - 1) / kBlock;
    // sum and sum of squares of bond, equity, cost, firm value
    std::vector<std::array<double, 8>> part(blocks);
    auto work = [&](std::size_t b0, std::size_t stride) {
        for (std::size_t b = b0; b < blocks; b += stride) {
            std::array<double, 8> acc{};
            for (std::size_t p = b * kBlock; p < std::min(n, (b + 1) * kBlock); ++p) {
                const PathOutcome o = path(p);
                const double v[4] = {o.bond, o.equity, o.cost, o.equity + o.bond_untaxed + o.cost};
                for (int q = 0; q < 4; ++q) {
                    acc[2 * q] += v[q];
                    acc[2 * q + 1] += v[q] * v[q];
                }
            }
            part[b] = acc;
        }
    };
    unsigned nt = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, std::max<std::size_t>(blocks, 1)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < nt; ++k) pool.emplace_back(work, k, nt);
    work(0, nt);
    for (auto& th : pool) th.join();

    std::array<double, 8> tot{};
    for (const auto& a : part)
        for (int q = 0; q < 8; ++q) tot[q] += a[q];
    auto est = [&](int q) {
        McEstimate e;
        e.n_paths = n;
        e.mean = tot[2 * q] / n;
        const double var = n > 1 ? std::max(0.0, (tot[2 * q + 1] - n * e.mean * e.mean) / (n - 1)) : 0.0;
        e.std_error = std::sqrt(var / n);
        return e;
    };
    return {est(0), est(1), est(2), est(3)};
}

inline void check_mc(const CouponBondSpec& s, const BarrierSchedule& K, double V0, const SimConfig& cfg) {
    s.validate();
    require(K.size() == s.size(), "barrier schedule length must match the coupon schedule");
    require(V0 > 0.0, "firm value must be positive");
    require(cfg.n_paths >= 1, "mc.paths must be >= 1");
}

}  // namespace detail

inline McReport mc_one_factor(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                              double V0, const SimConfig& cfg) {
    detail::check_mc(s, K, V0, cfg);
    m.validate();
    const std::size_t N = s.size();
    const auto cbar = s.promised(s.tax_rate), cbar0 = s.promised();
    const double delta = s.recovery, sig = m.s_V;

    return detail::run_paths(cfg, [&](std::size_t p) {
        detail::PathRng rng(cfg.seed, p);
        detail::PathOutcome o;
        const double tau = detail::sample_default_time(s, rng);
        double t = 0.0, V = V0, div = 0.0;
        auto advance = [&](double to) {
            const double h = to - t;
            div += V * std::exp(-m.r * t) * -std::expm1(-m.b * h);
            V *= std::exp((m.r - m.b - 0.5 * sig * sig) * h + sig * std::sqrt(h) * rng.z());
            t = to;
        };
        for (std::size_t i = 1; i <= N; ++i) {
            if (tau < s.date(i)) {
                advance(tau);
                double phi = 0.0, phi0 = 0.0;
                for (std::size_t k = i; k <= N; ++k) {
                    const double z = std::exp(-m.r * (s.date(k) - tau));
                    phi += cbar[k - 1] * z;
                    phi0 += cbar0[k - 1] * z;
                }
                const double d = std::exp(-m.r * tau);
                o.bond += d * std::min(delta * V, phi);
                o.bond_untaxed += d * std::min(delta * V, phi0);
                o.cost = div + d * V - o.equity - o.bond_untaxed;
                return o;
            }
            advance(s.date(i));
            const double d = std::exp(-m.r * t);
            if (V < K[i]) {
                o.bond += d * delta * V;
                o.bond_untaxed += d * delta * V;
                break;
            }
            o.bond += d * cbar[i - 1];
            o.bond_untaxed += d * cbar0[i - 1];
            o.equity -= d * s.coupon(i);
            if (i == N) o.equity += d * (V - s.face);
        }
        o.cost = div + std::exp(-m.r * t) * V - o.equity - o.bond_untaxed;
        return o;
    });
}

namespace detail {

// One exact Vasicek/GBM step of length h: (r_h, int r, ln V increment) are
// jointly Gaussian given r_0.
struct VasicekStep {
    double er, ei_r0, ei_c;  // r_h mean = er*r0 + (a1 B);  int r mean = ei_r0*r0 + ei_c
    double er_c;
    double L[3][3] = {};     // Cholesky factor of Cov(X1, X2, X3)
    double h, sv;
};

inline VasicekStep make_step(const VasicekMarket& m, double h, double sv) {
    VasicekKernel k{m.a2};
    VasicekStep st{};
    st.h = h;
    st.sv = sv;
    const double B = k.B(h);
    st.er = std::exp(-m.a2 * h);
    st.er_c = m.a1 * B;
    st.ei_r0 = B;
    st.ei_c = m.a1 * k.F1(h);
    const double sr = m.s_r;
    const double B2 = (m.a2 * h < 1e-6) ? h * (1.0 - m.a2 * h) : -std::expm1(-2.0 * m.a2 * h) / (2.0 * m.a2);
    const double c[3][3] = {{sr * sr * B2, sr * sr * B * B / 2, m.rho * sr * sv * B},
                            {sr * sr * B * B / 2, sr * sr * k.F2(h), m.rho * sr * sv * k.F1(h)},
                            {m.rho * sr * sv * B, m.rho * sr * sv * k.F1(h), sv * sv * h}};
    for (int j = 0; j < 3; ++j) {
        double d = c[j][j];
        for (int q = 0; q < j; ++q) d -= st.L[j][q] * st.L[j][q];
        const double piv = d > 1e-14 * (c[j][j] + 1e-300) ? std::sqrt(d) : 0.0;
        st.L[j][j] = piv;
        for (int i = j + 1; i < 3; ++i) {
            double v = c[i][j];
            for (int q = 0; q < j; ++q) v -= st.L[i][q] * st.L[j][q];
            st.L[i][j] = piv > 0.0 ? v / piv : 0.0;
        }
    }
    return st;
}

struct RateState {
    double r, I, lnV;
};

inline void apply_step(const VasicekStep& st, double b, RateState& x, PathRng& rng) {
    const double z[3] = {rng.z(), rng.z(), rng.z()};
    double e[3];
    for (int i = 0; i < 3; ++i) {
        e[i] = 0.0;
        for (int q = 0; q <= i; ++q) e[i] += st.L[i][q] * z[q];
    }
    const double dI = st.ei_r0 * x.r + st.ei_c + e[1];
    x.r = st.er * x.r + st.er_c + e[0];
    x.lnV += dI - (b + 0.5 * st.sv * st.sv) * st.h + e[2];
    x.I += dI;
}

inline void euler_step(const VasicekMarket& m, double h, double sv, unsigned n, RateState& x, PathRng& rng) {
    const double dt = h / n, sq = std::sqrt(dt), rb = std::sqrt(std::max(0.0, 1.0 - m.rho * m.rho));
    for (unsigned k = 0; k < n; ++k) {
        const double z1 = rng.z(), z2 = rng.z();
        const double r0 = x.r;
        x.lnV += (r0 - m.b - 0.5 * sv * sv) * dt + sv * sq * (m.rho * z1 + rb * z2);
        x.r += (m.a1 - m.a2 * r0) * dt + m.s_r * sq * z1;
        x.I += 0.5 * (r0 + x.r) * dt;
    }
}

// Advances the state from t to `to`, splitting at firm-volatility breakpoints.
// `div` accumulates E[int b V e^{-int r} ds | segment start].
inline void advance_2f(const VasicekMarket& m, const SimConfig& cfg, double& t, double to, RateState& x,
                       double& div, PathRng& rng) {
    while (t < to) {
        auto it = std::upper_bound(m.s_V.breaks.begin(), m.s_V.breaks.end(), t);
        const double end = (it != m.s_V.breaks.end()) ? std::min(*it, to) : to;
        const double h = end - t, sv = m.s_V(t);
        div += std::exp(x.lnV - x.I) * -std::expm1(-m.b * h);
        if (cfg.substeps_per_interval > 0) euler_step(m, h, sv, cfg.substeps_per_interval, x, rng);
        else apply_step(make_step(m, h, sv), m.b, x, rng);
        t = end;
    }
}

}  // namespace detail

inline McReport mc_two_factor(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double V0,
                              double r0, const SimConfig& cfg) {
    detail::check_mc(s, K, V0, cfg);
    m.validate();
    const std::size_t N = s.size();
    const double T = s.maturity(), delta = s.recovery;
    const auto cbar = s.promised(s.tax_rate), cbar0 = s.promised();

    return detail::run_paths(cfg, [&](std::size_t p) {
        detail::PathRng rng(cfg.seed, p);
        detail::PathOutcome o;
        const double tau = detail::sample_default_time(s, rng);
        detail::RateState x{r0, 0.0, std::log(V0)};
        double t = 0.0, div = 0.0;
        for (std::size_t i = 1; i <= N; ++i) {
            if (tau < s.date(i)) {
                detail::advance_2f(m, cfg, t, tau, x, div, rng);
                const double Z = zcb_price(m, x.r, tau, T), V = std::exp(x.lnV), d = std::exp(-x.I);
                double phi = 0.0, phi0 = 0.0;
                for (std::size_t k = i; k <= N; ++k) {
                    phi += cbar[k - 1];
                    phi0 += cbar0[k - 1];
                }
                o.bond += d * std::min(delta * V, phi * Z);
                o.bond_untaxed += d * std::min(delta * V, phi0 * Z);
                o.cost = div + d * V - o.equity - o.bond_untaxed;
                return o;
            }
            detail::advance_2f(m, cfg, t, s.date(i), x, div, rng);
            const double Z = zcb_price(m, x.r, t, T), V = std::exp(x.lnV), d = std::exp(-x.I);
            if (V < K[i] * Z) {
                o.bond += d * delta * V;
                o.bond_untaxed += d * delta * V;
                break;
            }
            o.bond += d * cbar[i - 1] * Z;
            o.bond_untaxed += d * cbar0[i - 1] * Z;
            o.equity -= d * s.coupon(i) * Z;
            if (i == N) o.equity += d * (V - s.face);
        }
        o.cost = div + std::exp(x.lnV - x.I) - o.equity - o.bond_untaxed;
        return o;
    });
}

inline McEstimate mc_price_one_factor(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K,
                                      double V0, const SimConfig& cfg) {
    return mc_one_factor(s, m, K, V0, cfg).bond;
}

inline McEstimate mc_price_two_factor(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K,
                                      double V0, double r0, const SimConfig& cfg) {
    return mc_two_factor(s, m, K, V0, r0, cfg).bond;
}

inline McEstimate mc_equity(const CouponBondSpec& s, const OneFactorMarket& m, const BarrierSchedule& K, double V0,
                            const SimConfig& cfg) {
    return mc_one_factor(s, m, K, V0, cfg).equity;
}

inline McEstimate mc_equity(const CouponBondSpec& s, const VasicekMarket& m, const BarrierSchedule& K, double V0,
                            double r0, const SimConfig& cfg) {
    return mc_two_factor(s, m, K, V0, r0, cfg).equity;
}

// E[exp(-int_0^T r du)] under the Vasicek dynamics.
inline McEstimate mc_zero_coupon(const VasicekMarket& m, double r0, double T, const SimConfig& cfg) {
    m.validate();
    const auto rep = detail::run_paths(cfg, [&](std::size_t p) {
        detail::PathRng rng(cfg.seed, p);
        detail::RateState x{r0, 0.0, 0.0};
        double t = 0.0, div = 0.0;
        detail::advance_2f(m, cfg, t, T, x, div, rng);
        detail::PathOutcome o;
        o.bond = std::exp(-x.I);
        return o;
    });
    return rep.bond;
}

}  // namespace cbond
