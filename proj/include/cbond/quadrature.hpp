#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "errors.hpp"

namespace cbond {

struct GaussRule {
    std::vector<double> nodes;    // on (0, 1)
    std::vector<double> weights;  // sum to 1
};

// n-point Gauss-Legendre rule mapped to (0, 1); cached per n.
inline const GaussRule& gauss_legendre(unsigned n) {
    static std::mutex mu;
    static std::map<unsigned, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(n));  // >= 0 half
    auto push = [&](double x) {
        const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(n), x);
        g.nodes.push_back(0.5 * (x + 1.0));
        g.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));  // 2/(..) halved for (0,1)
    };
    for (auto z = zeros.rbegin(); z != zeros.rend(); ++z)
        if (*z > 0.0) push(-*z);
    for (double z : zeros) push(z);
    return cache.emplace(n, std::move(g)).first->second;
}

// Integrates a vector-valued f over [a, b] with the substitution
// tau = a + (b - a) s^2, which absorbs the sqrt(tau - a) behaviour of binaries
// whose last observation date sits at tau. Starts at 32 nodes and doubles until
// every component changes by less than rel_tol, relative to max(|value|,
// abs_floor, 0.1 * largest component).
template <class F>
std::vector<double> integrate_tau(F&& f, double a, double b, std::size_t width, double rel_tol = 1e-10,
                                  double abs_floor = 1e-14) {
    std::vector<double> prev(width, 0.0), cur(width, 0.0);
    if (!(b > a)) return cur;
    const double len = b - a;
    bool have_prev = false;
    for (unsigned n = 32; n <= 1024; n *= 2) {
        const GaussRule& g = gauss_legendre(n);
        std::fill(cur.begin(), cur.end(), 0.0);
        for (unsigned k = 0; k < n; ++k) {
            const double s = g.nodes[k];
            const double jac = 2.0 * len * s * g.weights[k];
            const std::vector<double> v = f(a + len * s * s);
            for (std::size_t c = 0; c < width; ++c) cur[c] += jac * v[c];
        }
        if (have_prev) {
            // small components only need to be right relative to the largest one
            double scale = 0.0;
            for (double v : cur) scale = std::max(scale, std::abs(v));
            const double floor = std::max(abs_floor, 0.1 * scale);
            bool ok = true;
            for (std::size_t c = 0; c < width && ok; ++c)
                ok = std::abs(cur[c] - prev[c]) <= rel_tol * std::max(std::abs(cur[c]), floor);
            if (ok) return cur;
        }
        prev = cur;
        have_prev = true;
    }
    throw NumericalError("default-time quadrature did not converge");
}

}  // namespace cbond
