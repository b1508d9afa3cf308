#pragma once

// Model-independent pricing of equity and the defaultable coupon bond as
// sums of higher-order binaries on one lognormal state (firm value V in the
// one-factor model, relative price x = V/Z in the two-factor model). The
// dynamics policy supplies variance, drift, discounting and payout.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "../binaries.hpp"
#include "../bond.hpp"
#include "../quadrature.hpp"

namespace cbond::detail {

// Value with partials in ln x, the rate, and ln K_l (slot l-1).
struct Sens {
    double value = 0.0;
    double d_logx = 0.0;
    double d_rate = 0.0;
    std::vector<double> d_logK;

    Sens() = default;
    explicit Sens(std::size_t n) : d_logK(n, 0.0) {}

    void add(double w, const Sens& o) {
        value += w * o.value;
        d_logx += w * o.d_logx;
        d_rate += w * o.d_rate;
        for (std::size_t l = 0; l < d_logK.size(); ++l) d_logK[l] += w * o.d_logK[l];
    }
    std::size_t width() const { return 3 + d_logK.size(); }
    void pack(double* out) const {
        out[0] = value;
        out[1] = d_logx;
        out[2] = d_rate;
        std::copy(d_logK.begin(), d_logK.end(), out + 3);
    }
    void unpack(const double* in) {
        value = in[0];
        d_logx = in[1];
        d_rate = in[2];
        std::copy(in + 3, in + 3 + d_logK.size(), d_logK.begin());
    }
};

struct BondParts {
    Sens face, coupon, expected, unexpected_full, unexpected_recovery;

    explicit BondParts(std::size_t n)
        : face(n), coupon(n), expected(n), unexpected_full(n), unexpected_recovery(n) {}

    Sens total() const {
        Sens s(face.d_logK.size());
        for (const Sens* p : {&face, &coupon, &expected, &unexpected_full, &unexpected_recovery})
            s.add(1.0, *p);
        return s;
    }
    Sens unexpected() const {
        Sens s = unexpected_full;
        s.add(1.0, unexpected_recovery);
        return s;
    }
};

// Index i with T_i <= t < T_{i+1} (T_0 = 0).
inline std::size_t interval_of(const CouponBondSpec& s, double t) {
    require(t >= 0.0, "valuation time must be >= 0");
    return static_cast<std::size_t>(std::upper_bound(s.dates.begin(), s.dates.end(), t) - s.dates.begin());
}

// exp(-sum_{k=a}^{b} lambda_k (T_{k+1} - T_k)); 1 for an empty range.
inline double survival(const CouponBondSpec& s, std::size_t a, std::size_t b) {
    double e = 0.0;
    for (std::size_t k = a; k <= b && k < s.size(); ++k) e += s.intensities[k] * (s.date(k + 1) - s.date(k));
    return std::exp(-e);
}

// Adds w * binary into acc, routing ln K partials of coordinate j to barrier ids[j].
inline void accumulate(Sens& acc, double w, const BinaryValue& bv, std::size_t first_id) {
    acc.value += w * bv.value;
    acc.d_logx += w * bv.d_logx;
    acc.d_rate += w * bv.d_rate;
    for (std::size_t j = 0; j < bv.d_logK.size(); ++j) acc.d_logK[first_id + j - 1] += w * bv.d_logK[j];
}

inline std::vector<Coord> barrier_coords(const CouponBondSpec& s, const BarrierSchedule& K,
                                         std::size_t from, std::size_t to) {
    std::vector<Coord> c;
    for (std::size_t l = from; l <= to; ++l) c.push_back({s.date(l), K[l], +1});
    return c;
}

// Equity on (T_i, T_{i+1}] at (x, t): survival asset binary minus the
// coupon/principal bond binaries, each killed at the default intensities.
template <class Dyn>
Sens equity_value(const Dyn& dyn, const CouponBondSpec& s, const BarrierSchedule& K, double x, double t,
                  std::size_t i, bool sens) {
    const std::size_t N = s.size();
    Sens acc(N);
    const double outer = std::exp(-s.intensities[i] * (s.date(i + 1) - t));

    auto all = barrier_coords(s, K, i + 1, N);
    accumulate(acc, outer * survival(s, i + 1, N - 1), binary_term(dyn, BinaryKind::asset, x, t, all, sens),
               i + 1);
    for (std::size_t m = i; m < N; ++m) {
        const double c = (m + 1 == N) ? s.face + s.coupons.back() : s.coupon(m + 1);
        if (c == 0.0) continue;
        auto coords = barrier_coords(s, K, i + 1, m + 1);
        accumulate(acc, -outer * survival(s, i + 1, m) * c,
                   binary_term(dyn, BinaryKind::bond, x, t, coords, sens), i + 1);
    }
    return acc;
}

// Phi_m(tau) = sum_{k>m} cbar_k D(tau, T_k) and its rate derivative.
template <class Dyn>
void default_free(const Dyn& dyn, const CouponBondSpec& s, const std::vector<double>& cbar, std::size_t m,
                  double tau, double& phi, double& dphi) {
    phi = dphi = 0.0;
    for (std::size_t k = m + 1; k <= s.size(); ++k) {
        const double D = dyn.discount(tau, s.date(k));
        phi += cbar[k - 1] * D;
        dphi += cbar[k - 1] * D * dyn.discount_rate_sens(tau, s.date(k));
    }
}

// Bond on (T_i, T_{i+1}] at (x, t); cbar are the promised payments.
template <class Dyn>
BondParts bond_value(const Dyn& dyn, const CouponBondSpec& s, const BarrierSchedule& K,
                     const std::vector<double>& cbar, double x, double t, std::size_t i, bool sens) {
    const std::size_t N = s.size();
    const double delta = s.recovery;
    BondParts p(N);
    const double outer = std::exp(-s.intensities[i] * (s.date(i + 1) - t));

    for (std::size_t m = i; m < N; ++m) {
        const double w = outer * survival(s, i + 1, m);
        auto coords = barrier_coords(s, K, i + 1, m + 1);
        const double c = cbar[m];
        if (c > 0.0) {
            const BinaryValue bv = binary_term(dyn, BinaryKind::bond, x, t, coords, sens);
            if (m + 1 == N) {
                accumulate(p.face, w * s.face, bv, i + 1);
                accumulate(p.coupon, w * (c - s.face), bv, i + 1);
            } else {
                accumulate(p.coupon, w * c, bv, i + 1);
            }
        }
        if (delta > 0.0 && K[m + 1] > 0.0) {
            coords.back().sign = -1;
            accumulate(p.expected, w * delta, binary_term(dyn, BinaryKind::asset, x, t, coords, sens), i + 1);
        }
    }

    if (delta == 0.0) return p;  // min{0, Phi} = 0: nothing recovered at a Poisson default
    const std::size_t width = p.face.width();
    for (std::size_t m = i; m < N; ++m) {
        const double lam = s.intensities[m];
        if (lam == 0.0) continue;
        const double start = (m == i) ? t : s.date(m);
        const double pre = lam * ((m == i) ? 1.0 : outer * survival(s, i + 1, m - 1));
        auto base = barrier_coords(s, K, i + 1, m);

        auto integrand = [&](double tau) {
            std::vector<double> out(2 * width, 0.0);
            double phi, dphi;
            default_free(dyn, s, cbar, m, tau, phi, dphi);
            if (phi <= 0.0) return out;
            const double kappa = dphi / phi;  // d ln M / dr
            const double w = pre * std::exp(-lam * (tau - start));
            auto coords = base;
            coords.push_back({tau, phi / delta, +1});
            Sens full(N), rec(N);
            const BinaryValue bv = binary_term(dyn, BinaryKind::bond, x, t, coords, sens);
            coords.back().sign = -1;
            const BinaryValue av = binary_term(dyn, BinaryKind::asset, x, t, coords, sens);
            const std::size_t last = coords.size() - 1;

            full.value = phi * bv.value;
            rec.value = delta * av.value;
            if (sens) {
                full.d_logx = phi * bv.d_logx;
                full.d_rate = dphi * bv.value + phi * (bv.d_rate + bv.d_logK[last] * kappa);
                rec.d_logx = delta * av.d_logx;
                rec.d_rate = delta * (av.d_rate + av.d_logK[last] * kappa);
                for (std::size_t j = 0; j < last; ++j) {
                    full.d_logK[i + j] = phi * bv.d_logK[j];
                    rec.d_logK[i + j] = delta * av.d_logK[j];
                }
            }
            full.pack(out.data());
            rec.pack(out.data() + width);
            for (double& v : out) v *= w;
            return out;
        };
        const std::vector<double> r = integrate_tau(integrand, start, s.date(m + 1), 2 * width);
        Sens full(N), rec(N);
        full.unpack(r.data());
        rec.unpack(r.data() + width);
        p.unexpected_full.add(1.0, full);
        p.unexpected_recovery.add(1.0, rec);
    }
    return p;
}

// Backward recursion for K_{N-1}, ..., K_1: the root of E_i(., T_i) = C_i.
template <class Dyn>
BarrierSchedule solve_barriers(const Dyn& dyn, const CouponBondSpec& s) {
    const std::size_t N = s.size();
    BarrierSchedule K;
    K.levels.assign(N, 0.0);
    K.levels[N - 1] = s.face + s.coupons.back();
    double scale = s.face;
    for (double c : s.coupons) scale += c;
    for (std::size_t i = N - 1; i >= 1; --i) {
        const double C = s.coupon(i);
        if (C == 0.0) continue;
        auto f = [&](double v) { return equity_value(dyn, s, K, v, s.date(i), i, false).value - C; };
        double lo = 1e-12 * scale, hi = scale;
        double flo = f(lo), fhi = f(hi);
        for (int k = 0; k < 200 && fhi <= 0.0; ++k) {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = f(hi);
        }
        if (!(flo < 0.0 && fhi > 0.0))
            throw NumericalError("barrier K_" + std::to_string(i) + ": root not bracketed");
        std::uintmax_t iters = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::abs(b); };
        auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
        if (iters >= 200) throw NumericalError("barrier K_" + std::to_string(i) + ": root did not converge");
        K.levels[i - 1] = 0.5 * (a + b);
    }
    return K;
}

// d ln K_l / dr via the implicit function theorem, from K_{N-1} down to K_1.
template <class Dyn>
std::vector<double> barrier_rate_sens(const Dyn& dyn, const CouponBondSpec& s, const BarrierSchedule& K) {
    const std::size_t N = s.size();
    std::vector<double> kappa(N, 0.0);
    for (std::size_t j = N - 1; j >= 1; --j) {
        if (K[j] == 0.0) continue;
        const Sens e = equity_value(dyn, s, K, K[j], s.date(j), j, true);
        double rhs = e.d_rate;
        for (std::size_t l = j + 1; l <= N; ++l) rhs += e.d_logK[l - 1] * kappa[l - 1];
        kappa[j - 1] = -rhs / e.d_logx;
    }
    return kappa;
}

// The t = 0 price written in the normalized G / g notation: every term is a
// standard normal CDF of d-arguments built from (x0/K) and the accumulated
// variances, weighted by explicit survival and payout exponentials.
struct InitialParts {
    double face = 0, coupon = 0, expected = 0, unexpected_full = 0, unexpected_recovery = 0;
    double asset_survival = 0;  // x0 G_N^+
};

template <class Dyn>
InitialParts initial_parts(const Dyn& dyn, const CouponBondSpec& s, const BarrierSchedule& K,
                           const std::vector<double>& cbar, double x0) {
    const std::size_t N = s.size();
    const double delta = s.recovery, lx = std::log(x0);
    std::vector<double> nu(N), dp(N), dm(N), Lam(N + 1, 0.0);
    for (std::size_t j = 1; j <= N; ++j) {
        nu[j - 1] = dyn.variance(0.0, s.date(j));
        Lam[j] = Lam[j - 1] + s.intensities[j - 1] * (s.date(j) - s.date(j - 1));
        if (K[j] == 0.0) {
            dp[j - 1] = dm[j - 1] = kInf;
            continue;
        }
        const double core = lx - std::log(K[j]) + dyn.drift(0.0, s.date(j));
        dp[j - 1] = (core + 0.5 * nu[j - 1]) / std::sqrt(nu[j - 1]);
        dm[j - 1] = (core - 0.5 * nu[j - 1]) / std::sqrt(nu[j - 1]);
    }
    auto nested = [&](std::size_t m, double extra_nu) {
        std::vector<double> v(nu.begin(), nu.begin() + m);
        if (extra_nu > 0.0) v.push_back(extra_nu);
        CorrMatrix A(v.size());
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b) A.set(a, b, std::sqrt(v[a] / v[b]));
        return A;
    };
    auto N_of = [](std::vector<double> lim, CorrMatrix A) { return mvn_cdf({std::move(lim), std::move(A)}).value; };

    InitialParts out;
    for (std::size_t m = 1; m <= N; ++m) {
        const double G = std::exp(-Lam[m]) * N_of({dm.begin(), dm.begin() + m}, nested(m, 0.0));
        const double Z = dyn.discount(0.0, s.date(m));
        if (m == N) {
            out.face += s.face * Z * G;
            out.coupon += (cbar[m - 1] - s.face) * Z * G;
        } else {
            out.coupon += cbar[m - 1] * Z * G;
        }
        if (delta > 0.0 && K[m] > 0.0) {
            std::vector<double> lim(dp.begin(), dp.begin() + m);
            lim.back() = -lim.back();
            const double Gt = std::exp(-Lam[m]) * dyn.payout(0.0, s.date(m)) *
                              N_of(std::move(lim), flip_last_sign(nested(m, 0.0)));
            out.expected += delta * x0 * Gt;
        }
    }
    out.asset_survival = x0 * std::exp(-Lam[N]) * dyn.payout(0.0, s.date(N)) * N_of(dp, nested(N, 0.0));

    if (delta == 0.0) return out;
    for (std::size_t m = 0; m < N; ++m) {
        const double lam = s.intensities[m];
        if (lam == 0.0) continue;
        double phi0 = 0.0, unused;
        default_free(dyn, s, cbar, m, 0.0, phi0, unused);
        auto g = [&](double tau) {
            std::vector<double> r(2, 0.0);
            double phi, dphi;
            default_free(dyn, s, cbar, m, tau, phi, dphi);
            if (phi <= 0.0) return r;
            const double nt = dyn.variance(0.0, tau);
            const double core = lx - std::log(phi / delta) + dyn.drift(0.0, tau);
            const double w = lam * std::exp(-Lam[m] - lam * (tau - s.date(m)));
            std::vector<double> lm(dm.begin(), dm.begin() + m), lp(dp.begin(), dp.begin() + m);
            lm.push_back((core - 0.5 * nt) / std::sqrt(nt));
            lp.push_back(-(core + 0.5 * nt) / std::sqrt(nt));
            r[0] = w * phi0 * N_of(std::move(lm), nested(m, nt));
            r[1] = w * delta * x0 * dyn.payout(0.0, tau) * N_of(std::move(lp), flip_last_sign(nested(m, nt)));
            return r;
        };
        const auto r = integrate_tau(g, s.date(m), s.date(m + 1), 2);
        out.unexpected_full += r[0];
        out.unexpected_recovery += r[1];
    }
    return out;
}

}  // namespace cbond::detail
