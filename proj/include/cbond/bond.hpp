#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cbond {

struct CouponBondSpec {
    double face = 0.0;                 // F
    std::vector<double> dates;         // T_1..T_N, years, strictly ascending
    std::vector<double> coupons;       // C_1..C_N
    double recovery = 0.0;             // delta
    std::vector<double> intensities;   // lambda_0..lambda_{N-1}; lambda_i on (T_i, T_{i+1}]
    double tax_rate = 0.0;             // Lambda

    std::size_t size() const { return dates.size(); }
    double maturity() const { return dates.back(); }
    double date(std::size_t i) const { return i == 0 ? 0.0 : dates[i - 1]; }  // T_0 = 0
    double coupon(std::size_t i) const { return coupons[i - 1]; }             // C_i, 1-based

    void validate() const {
        using detail::require;
        const std::size_t n = dates.size();
        require(n >= 1, "bond.coupon_dates must be non-empty");
        require(coupons.size() == n, "bond.coupons must match bond.coupon_dates in length");
        require(intensities.size() == n, "bond.intensities must match bond.coupon_dates in length");
        require(std::isfinite(face) && face >= 0.0, "bond.face must be >= 0");
        require(dates[0] > 0.0, "bond.coupon_dates must be positive");
        for (std::size_t i = 0; i < n; ++i) {
            require(std::isfinite(dates[i]), "bond.coupon_dates must be finite");
            if (i > 0) require(dates[i] > dates[i - 1], "bond.coupon_dates must be strictly ascending");
            require(std::isfinite(coupons[i]) && coupons[i] >= 0.0, "bond.coupons must be >= 0");
            require(std::isfinite(intensities[i]) && intensities[i] >= 0.0,
                    "bond.intensities must be >= 0");
        }
        require(recovery >= 0.0 && recovery <= 1.0, "bond.recovery must lie in [0, 1]");
        require(tax_rate >= 0.0 && tax_rate < 1.0, "bond.tax_rate must lie in [0, 1)");
    }

    // Cash promised at T_i: cbar_i = (1-Lambda) C_i, plus F at maturity.
    std::vector<double> promised(double tax = 0.0) const {
        std::vector<double> c(size());
        for (std::size_t i = 0; i < size(); ++i) c[i] = (1.0 - tax) * coupons[i];
        c.back() += face;
        return c;
    }
};

// K_1..K_N (index i-1 holds K_i).
struct BarrierSchedule {
    std::vector<double> levels;
    double operator[](std::size_t i) const { return levels[i - 1]; }  // 1-based
    std::size_t size() const { return levels.size(); }
};

struct PriceBreakdown {
    double total = 0.0;
    double survival_pv = 0.0;            // face repaid at maturity on survival
    double coupon_pv = 0.0;              // coupons on survival
    double expected_default_pv = 0.0;    // recovery at coupon-date (barrier) defaults
    double unexpected_default_pv = 0.0;  // everything paid at intensity-driven defaults
};

// Case I of the tax section: delta <= 1/(1 + C_N/F).
inline bool tax_case_one(const CouponBondSpec& s) {
    if (s.face <= 0.0) return s.coupons.back() == 0.0 || s.recovery == 0.0;
    return s.recovery * (1.0 + s.coupons.back() / s.face) <= 1.0;
}

inline void require_tax_case_one(const CouponBondSpec& s) {
    if (s.tax_rate > 0.0 && !tax_case_one(s))
        throw UnsupportedCaseError(
            "tax case II: only case I, delta <= 1/(1 + c_N) with c_N = C_N/F, is supported (delta=" +
            std::to_string(s.recovery) + ", c_N=" + std::to_string(s.coupons.back() / s.face) + ")");
}

}  // namespace cbond
