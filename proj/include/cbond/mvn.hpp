#pragma once

// Multivariate standard-normal CDF for the small, highly structured problems
// produced by the bond formulas.
//
// Strategy: drop +inf limits, split the correlation graph into independent
// blocks, and integrate out one "pivot" variable at a time (adaptive
// Gauss-Kronrod against the normal density) until only 1-d and 2-d pieces remain. The
// nested-time matrices are Markov, so conditioning on a middle date splits
// them in two and the recursion stays shallow. Problems that would need more
// than two nested integrals fall back to randomized-lattice QMC on the
// Genz separation-of-variables transform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "normal.hpp"

namespace cbond {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class CorrMatrix {
public:
    CorrMatrix() = default;
    explicit CorrMatrix(std::size_t m) : m_(m), a_(m * m, 0.0) {
        for (std::size_t i = 0; i < m; ++i) a_[i * m + i] = 1.0;
    }

    std::size_t dim() const { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * m_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        a_[i * m_ + j] = v;
        a_[j * m_ + i] = v;
    }

    // Throws DomainError unless symmetric, unit diagonal, |r|<1 and PD.
    void validate() const;

private:
    std::size_t m_ = 0;
    std::vector<double> a_;
};

struct MvnProblem {
    std::vector<double> limits;
    CorrMatrix corr;
};

struct MvnResult {
    double value = 0.0;
    double error = 0.0;
};

enum class MvnMethod { automatic, conditioning, lattice };

struct MvnOptions {
    std::size_t max_dim = 0;  // 0: CBOND_MAX_MVN_DIM or 12
    MvnMethod method = MvnMethod::automatic;
    std::uint64_t seed = 0x5eed;  // lattice shifts only
};

inline std::size_t default_max_mvn_dim() {
    static const std::size_t cap = [] {
        if (const char* s = std::getenv("CBOND_MAX_MVN_DIM")) {
            char* end = nullptr;
            long v = std::strtol(s, &end, 10);
            if (end != s && v > 0) return static_cast<std::size_t>(v);
        }
        return std::size_t{12};
    }();
    return cap;
}

// Bivariate P(X <= a, Y <= b), corr r. Genz's BVND (Drezner-Wesolowsky with
// Gauss-Legendre rules of 6/12/20 points chosen by |r|).
inline double bvn_cdf(double a, double b, double r) {
    if (a == -kInf || b == -kInf) return 0.0;
    if (a == kInf) return norm_cdf(b);
    if (b == kInf) return norm_cdf(a);
    if (r == 0.0) return norm_cdf(a) * norm_cdf(b);

    static constexpr double W[3][10] = {
        {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
        {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
         0.2334925365383547, 0.2491470458134029},
        {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
         0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
         0.1491729864726037, 0.1527533871307259}};
    static constexpr double X[3][10] = {
        {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
        {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050, -0.5873179542866171,
         -0.3678314989981802, -0.1252334085114692},
        {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
         -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
         -0.2277858511416451, -0.07652652113349733}};
    constexpr double twopi = 2.0 * std::numbers::pi;

    int ng, lg;
    if (std::abs(r) < 0.3) { ng = 0; lg = 3; }
    else if (std::abs(r) < 0.75) { ng = 1; lg = 6; }
    else { ng = 2; lg = 10; }

    double h = -a, k = -b, hk = h * k, bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2, asr = std::asin(r);
        for (int i = 0; i < lg; ++i) {
            double sn = std::sin(asr * (X[ng][i] + 1) / 2);
            bvn += W[ng][i] * std::exp((sn * hk - hs) / (1 - sn * sn));
            sn = std::sin(asr * (-X[ng][i] + 1) / 2);
            bvn += W[ng][i] * std::exp((sn * hk - hs) / (1 - sn * sn));
        }
        bvn = bvn * asr / (2 * twopi) + norm_cdf(-h) * norm_cdf(-k);
    } else {
        if (r < 0) { k = -k; hk = -hk; }
        if (std::abs(r) < 1) {
            const double as = (1 - r) * (1 + r);
            double aa = std::sqrt(as);
            const double bs = (h - k) * (h - k), c = (4 - hk) / 8, d = (12 - hk) / 16;
            bvn = aa * std::exp(-(bs / as + hk) / 2) *
                  (1 - c * (bs - as) * (1 - d * bs / 5) / 3 + c * d * as * as / 5);
            if (hk > -160) {
                const double bb = std::sqrt(bs);
                bvn -= std::exp(-hk / 2) * std::sqrt(twopi) * norm_cdf(-bb / aa) * bb *
                       (1 - c * bs * (1 - d * bs / 5) / 3);
            }
            aa /= 2;
            for (int i = 0; i < lg; ++i) {
                double xs = (aa * (X[ng][i] + 1)) * (aa * (X[ng][i] + 1));
                double rs = std::sqrt(1 - xs);
                bvn += aa * W[ng][i] *
                       (std::exp(-bs / (2 * xs) - hk / (1 + rs)) / rs -
                        std::exp(-(bs / xs + hk) / 2) * (1 + c * xs * (1 + d * xs)));
                xs = as * (-X[ng][i] + 1) * (-X[ng][i] + 1) / 4;
                rs = std::sqrt(1 - xs);
                bvn += aa * W[ng][i] * std::exp(-(bs / xs + hk) / 2) *
                       (std::exp(-hk * (1 - rs) / (2 * (1 + rs))) / rs - (1 + c * xs * (1 + d * xs)));
            }
            bvn = -bvn / twopi;
        }
        if (r > 0) bvn += norm_cdf(-std::max(h, k));
        if (r < 0) bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
    }
    return std::clamp(bvn, 0.0, 1.0);
}

namespace detail {

inline constexpr double kZeroCorr = 1e-15;

// Dense row-major correlation used internally (no validation).
struct Dense {
    std::size_t m = 0;
    std::vector<double> a;
    double operator()(std::size_t i, std::size_t j) const { return a[i * m + j]; }
};

inline bool cholesky_ok(const Dense& R) {
    const std::size_t m = R.m;
    std::vector<double> L(m * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double s = R(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= L[j * m + k] * L[j * m + k];
        if (!(s > 1e-14)) return false;
        L[j * m + j] = std::sqrt(s);
        for (std::size_t i = j + 1; i < m; ++i) {
            double t = R(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= L[i * m + k] * L[j * m + k];
            L[i * m + j] = t / L[j * m + j];
        }
    }
    return true;
}

// Connected components of the graph with an edge wherever |R_ij| > 0.
inline std::vector<std::vector<std::size_t>> components(const Dense& R) {
    std::vector<int> label(R.m, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < R.m; ++s) {
        if (label[s] >= 0) continue;
        out.emplace_back();
        std::vector<std::size_t> stack{s};
        label[s] = static_cast<int>(out.size() - 1);
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            out.back().push_back(v);
            for (std::size_t w = 0; w < R.m; ++w)
                if (label[w] < 0 && std::abs(R(v, w)) > kZeroCorr) {
                    label[w] = label[s];
                    stack.push_back(w);
                }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

inline Dense submatrix(const Dense& R, const std::vector<std::size_t>& idx) {
    Dense S{idx.size(), std::vector<double>(idx.size() * idx.size())};
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) S.a[i * S.m + j] = R(idx[i], idx[j]);
    return S;
}

// Correlation of the remaining variables given variable k.
inline Dense conditional(const Dense& R, std::size_t k, std::vector<double>& beta,
                         std::vector<double>& scale) {
    const std::size_t m = R.m;
    Dense C{m - 1, std::vector<double>((m - 1) * (m - 1))};
    beta.clear();
    scale.clear();
    for (std::size_t j = 0; j < m; ++j) {
        if (j == k) continue;
        beta.push_back(R(j, k));
        scale.push_back(std::sqrt((1 - R(j, k)) * (1 + R(j, k))));
    }
    for (std::size_t i = 0, ii = 0; i < m; ++i) {
        if (i == k) continue;
        for (std::size_t j = 0, jj = 0; j < m; ++j) {
            if (j == k) continue;
            double v = 1.0;
            if (i != j) {
                // Exact conditional independence (nested structures) only cancels to
                // round-off; snap it to zero so the plan can split there.
                const double p = R(i, k) * R(j, k), num = R(i, j) - p;
                v = std::abs(num) <= 256.0 * std::numeric_limits<double>::epsilon() * (std::abs(R(i, j)) + std::abs(p))
                        ? 0.0
                        : num / (scale[ii] * scale[jj]);
            }
            C.a[ii * (m - 1) + jj] = std::clamp(v, -1.0, 1.0);
            ++jj;
        }
        ++ii;
    }
    return C;
}

// Evaluation plan; built once per correlation structure.
struct Plan {
    enum class Kind { one, two, product, condition } kind = Kind::one;
    double rho = 0.0;                                  // two
    std::vector<std::vector<std::size_t>> parts;       // product: variable subsets
    std::vector<std::unique_ptr<Plan>> children;       // product parts / condition remainder
    std::size_t pivot = 0;                             // condition
    std::vector<double> beta, scale;                   // condition
    int depth = 0;                                     // nested integrals below this node
};

inline std::unique_ptr<Plan> build_plan(const Dense& R);

inline std::unique_ptr<Plan> build_connected(const Dense& R) {
    auto p = std::make_unique<Plan>();
    if (R.m == 1) return p;
    if (R.m == 2) {
        p->kind = Plan::Kind::two;
        p->rho = R(0, 1);
        return p;
    }
    // Pivot: smallest largest remaining block, then weakest coupling.
    std::size_t best = 0, best_block = R.m + 1;
    double best_coupling = 2.0;
    for (std::size_t k = 0; k < R.m; ++k) {
        std::vector<double> b, s;
        Dense C = conditional(R, k, b, s);
        std::size_t block = 0;
        for (auto& c : components(C)) block = std::max(block, c.size());
        double coupling = 0.0;
        for (double x : b) coupling = std::max(coupling, std::abs(x));
        if (block < best_block || (block == best_block && coupling < best_coupling - 1e-12)) {
            best = k;
            best_block = block;
            best_coupling = coupling;
        }
    }
    p->kind = Plan::Kind::condition;
    p->pivot = best;
    Dense C = conditional(R, best, p->beta, p->scale);
    p->children.push_back(build_plan(C));
    p->depth = 1 + p->children.front()->depth;
    return p;
}

inline std::unique_ptr<Plan> build_plan(const Dense& R) {
    auto comps = components(R);
    if (comps.size() == 1) return build_connected(R);
    auto p = std::make_unique<Plan>();
    p->kind = Plan::Kind::product;
    for (auto& c : comps) {
        p->children.push_back(build_connected(submatrix(R, c)));
        p->depth = std::max(p->depth, p->children.back()->depth);
    }
    p->parts = std::move(comps);
    return p;
}

// Globally adaptive 15-point Gauss-Kronrod over the initial panels given by
// the sorted points pts: bisect the worst panel until the summed error
// estimate drops below abs_tol or the panel budget runs out.
template <class F>
double adaptive_gk(F& f, const std::vector<double>& pts, double& err, double abs_tol = 1e-13,
                   int max_panels = 200) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Panel {
        double a, b, v, e;
        bool operator<(const Panel& o) const { return e < o.e; }
    };
    auto eval = [&](double lo, double hi) {
        double e = 0.0;
        const double v = GK::integrate(f, lo, hi, 0, 0.0, &e);
        return Panel{lo, hi, v, e};
    };
    std::vector<Panel> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (!(pts[k + 1] > pts[k])) continue;
        heap.push_back(eval(pts[k], pts[k + 1]));
        total += heap.back().v;
        total_err += heap.back().e;
    }
    std::make_heap(heap.begin(), heap.end());
    max_panels += static_cast<int>(heap.size());
    while (total_err > abs_tol && static_cast<int>(heap.size()) < max_panels) {
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        for (const Panel& p : {eval(worst.a, mid), eval(mid, worst.b)}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
        }
        total = total_err = 0.0;
        for (const Panel& p : heap) {
            total += p.v;
            total_err += p.e;
        }
    }
    err = total_err;
    return total;
}

struct Eval {
    double error = 0.0;

    double run(const Plan& p, const double* a) {
        switch (p.kind) {
            case Plan::Kind::one:
                return norm_cdf(a[0]);
            case Plan::Kind::two:
                return bvn_cdf(a[0], a[1], p.rho);
            case Plan::Kind::product: {
                double v = 1.0;
                std::vector<double> sub;
                for (std::size_t c = 0; c < p.parts.size() && v > 0.0; ++c) {
                    sub.clear();
                    for (std::size_t i : p.parts[c]) sub.push_back(a[i]);
                    v *= run(*p.children[c], sub.data());
                }
                return v;
            }
            case Plan::Kind::condition:
                return condition(p, a);
        }
        return 0.0;
    }

    // int_{-inf}^{a_k} phi(y) N(remaining | y) dy, truncated where phi is negligible.
    double condition(const Plan& p, const double* a) {
        const double ak = a[p.pivot];
        const double hi = std::min(ak, 9.0), lo = std::min(-9.0, ak - 10.0);
        if (ak < -38.0) return 0.0;
        const std::size_t n = p.beta.size();
        std::vector<double> rest, c(n);
        for (std::size_t j = 0; j <= n; ++j)
            if (j != p.pivot) rest.push_back(a[j]);
        auto f = [&](double y) {
            for (std::size_t j = 0; j < n; ++j) c[j] = (rest[j] - p.beta[j] * y) / p.scale[j];
            Eval inner;
            const double v = inner.run(*p.children.front(), c.data());
                        return norm_pdf(y) * v;
        };
        // A child limit (rest_j - beta_j y)/scale_j with a small scale_j turns
        // into a near-step at y = rest_j/beta_j; start with panel edges there.
        std::vector<double> pts{lo, hi};
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(rest[j]) || p.beta[j] == 0.0) continue;
            const double w = p.scale[j] / std::abs(p.beta[j]);
            if (w > 0.05 * (hi - lo)) continue;
            const double y0 = rest[j] / p.beta[j];
            for (double k : {-8.0, -2.0, 0.0, 2.0, 8.0}) {
                const double y = y0 + k * w;
                if (y > lo && y < hi) pts.push_back(y);
            }
        }
        std::sort(pts.begin(), pts.end());
        double err = 0.0;
        const double v = adaptive_gk(f, pts, err);
        error += err;
        return std::clamp(v, 0.0, norm_cdf(ak));
    }
};

// Genz separation of variables with a randomized Richtmyer lattice.
inline MvnResult lattice_cdf(const std::vector<double>& a, const Dense& R, double tol,
                             std::uint64_t seed) {
    const std::size_t m = a.size();
    std::vector<double> L(m * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double s = R(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= L[j * m + k] * L[j * m + k];
        L[j * m + j] = std::sqrt(s);
        for (std::size_t i = j + 1; i < m; ++i) {
            double t = R(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= L[i * m + k] * L[j * m + k];
            L[i * m + j] = t / L[j * m + j];
        }
    }
    static constexpr std::array<double, 12> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) z[j] = std::sqrt(primes[j % primes.size()] + 40.0 * (j / 12));
    for (auto& v : z) v -= std::floor(v);

    auto integrand = [&](const std::vector<double>& w) {
        std::vector<double> y(m);
        double f = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < i; ++k) s += L[i * m + k] * y[k];
            const double e = norm_cdf((a[i] - s) / L[i * m + i]);
            f *= e;
            if (f <= 0.0) return 0.0;
            if (i + 1 < m) y[i] = norm_quantile(std::clamp(w[i] * e, 1e-300, 1.0 - 1e-16));
        }
        return f;
    };

    constexpr int shifts = 12;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> shift(shifts, std::vector<double>(m));
    for (auto& s : shift)
        for (auto& v : s) v = unif(gen);

    MvnResult res;
    std::vector<double> w(m);
    for (std::size_t n = 1 << 10; n <= (std::size_t{1} << 18); n <<= 1) {
        double sum = 0.0, sum2 = 0.0;
        for (int s = 0; s < shifts; ++s) {
            double acc = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t j = 0; j < m; ++j) {
                    double x = k * z[j] + shift[s][j];
                    x -= std::floor(x);
                    w[j] = std::abs(2.0 * x - 1.0);
                }
                acc += integrand(w);
            }
            acc /= static_cast<double>(n);
            sum += acc;
            sum2 += acc * acc;
        }
        res.value = sum / shifts;
        const double var = std::max(0.0, (sum2 / shifts - res.value * res.value)) / (shifts - 1);
        res.error = 3.0 * std::sqrt(var);
        if (res.error < tol) break;
    }
    res.value = std::clamp(res.value, 0.0, 1.0);
    return res;
}

inline Dense to_dense(const CorrMatrix& C) {
    Dense D{C.dim(), std::vector<double>(C.dim() * C.dim())};
    for (std::size_t i = 0; i < D.m; ++i)
        for (std::size_t j = 0; j < D.m; ++j) D.a[i * D.m + j] = C(i, j);
    return D;
}

}  // namespace detail

inline void CorrMatrix::validate() const {
    for (std::size_t i = 0; i < m_; ++i) {
        if ((*this)(i, i) != 1.0) throw DomainError("correlation diagonal must be 1");
        for (std::size_t j = 0; j < m_; ++j) {
            const double v = (*this)(i, j);
            if (!std::isfinite(v) || v != (*this)(j, i))
                throw DomainError("correlation matrix must be symmetric and finite");
            if (i != j && !(std::abs(v) < 1.0))
                throw DomainError("off-diagonal correlation must lie in (-1, 1)");
        }
    }
    if (!detail::cholesky_ok(detail::to_dense(*this)))
        throw DomainError("correlation matrix is not positive definite");
}

// P(Y_1 <= a_1, ..., Y_m <= a_m).
inline MvnResult mvn_cdf(const MvnProblem& prob, double tol = 1e-8, const MvnOptions& opt = {}) {
    const std::size_t m = prob.corr.dim();
    if (prob.limits.size() != m) throw DomainError("mvn: limits and correlation size differ");
    if (!(tol > 0.0)) throw DomainError("mvn: tol must be positive");
    const std::size_t cap = opt.max_dim ? opt.max_dim : default_max_mvn_dim();
    if (m > cap)
        throw DimensionError("mvn: dimension " + std::to_string(m) + " exceeds cap " +
                             std::to_string(cap));
    prob.corr.validate();

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m; ++i) {
        const double a = prob.limits[i];
        if (std::isnan(a)) throw DomainError("mvn: NaN limit");
        if (a == -kInf) return {0.0, 0.0};
        if (a != kInf) keep.push_back(i);
    }
    if (keep.empty()) return {1.0, 0.0};

    std::vector<double> a;
    for (std::size_t i : keep) a.push_back(prob.limits[i]);
    detail::Dense R = detail::submatrix(detail::to_dense(prob.corr), keep);
    if (R.m == 1) return {norm_cdf(a[0]), 0.0};
    if (R.m == 2) return {bvn_cdf(a[0], a[1], R(0, 1)), 1e-15};

    auto plan = detail::build_plan(R);
    const bool lattice = opt.method == MvnMethod::lattice ||
                         (opt.method == MvnMethod::automatic && plan->depth > 2);
    if (lattice) return detail::lattice_cdf(a, R, tol, opt.seed);
    detail::Eval ev;
    MvnResult res;
    res.value = ev.run(*plan, a.data());
    res.error = ev.error;
    return res;
}

inline double mvn_value(const MvnProblem& prob) { return mvn_cdf(prob).value; }

// r_ij = sqrt(nu_i / nu_j) for i <= j, nu_i = variance accumulated from t to T_i.
inline CorrMatrix nested_corr(double t, const std::vector<double>& obs_times,
                              const std::function<double(double, double)>& variance_fn) {
    const std::size_t m = obs_times.size();
    if (m == 0) throw DomainError("nested_corr: no observation times");
    if (!(t < obs_times.front())) throw DomainError("nested_corr: t must precede first date");
    std::vector<double> nu(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0 && !(obs_times[i] > obs_times[i - 1]))
            throw DomainError("nested_corr: observation times must be strictly ascending");
        nu[i] = variance_fn(t, obs_times[i]);
    }
    CorrMatrix C(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) C.set(i, j, std::sqrt(nu[i] / nu[j]));
    return C;
}

inline CorrMatrix flip_last_sign(const CorrMatrix& corr) {
    CorrMatrix out = corr;
    const std::size_t m = corr.dim();
    for (std::size_t i = 0; i + 1 < m; ++i) out.set(i, m - 1, -corr(i, m - 1));
    return out;
}

// dN_m/da_i: phi(a_i) times the conditional (m-1)-variate CDF.
inline double mvn_boundary_slice(const MvnProblem& prob, std::size_t i, const MvnOptions& opt = {}) {
    const std::size_t m = prob.corr.dim();
    if (i >= m) throw DomainError("mvn_boundary_slice: index out of range");
    if (prob.limits.size() != m) throw DomainError("mvn: limits and correlation size differ");
    const double ai = prob.limits[i];
    if (!std::isfinite(ai)) throw DomainError("mvn_boundary_slice: pinned limit must be finite");
    const double dens = norm_pdf(ai);
    if (m == 1) return dens;
    for (double a : prob.limits)
        if (a == -kInf) return 0.0;

    std::vector<double> beta, scale;
    detail::Dense C = detail::conditional(detail::to_dense(prob.corr), i, beta, scale);
    MvnProblem cond{std::vector<double>(m - 1), CorrMatrix(m - 1)};
    for (std::size_t j = 0, jj = 0; j < m; ++j) {
        if (j == i) continue;
        const double a = prob.limits[j];
        cond.limits[jj] = (a == kInf) ? kInf : (a - beta[jj] * ai) / scale[jj];
        ++jj;
    }
    for (std::size_t r = 0; r < m - 1; ++r)
        for (std::size_t c = r + 1; c < m - 1; ++c) cond.corr.set(r, c, C(r, c));
    return dens * mvn_cdf(cond, 1e-10, opt).value;
}

}  // namespace cbond
