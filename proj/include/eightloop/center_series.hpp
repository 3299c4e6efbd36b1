#pragma once

// Power series of I0 and I2 at the center level, in the variable s = h + 1/4.

#include "eightloop/rational.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace eightloop {

inline constexpr double kC1 = std::numbers::pi * std::numbers::sqrt2;  // I1 = kC1 * s

inline constexpr int kMaxCenterTerms = 64;

/// Exact coefficients in units of kC1: I0 = kC1 sum a_k s^k, I2 = kC1 sum c_k s^k, k >= 1.
/// Index 0 holds zero so that a[k] is the s^k coefficient.
struct CenterCoefficients {
    std::vector<Rational> a;
    std::vector<Rational> c;
};

inline CenterCoefficients center_coefficients(int n_terms) {
    if (n_terms < 1 || n_terms > kMaxCenterTerms) throw std::invalid_argument("center series: n_terms out of range");
    CenterCoefficients r;
    r.a.assign(n_terms + 1, Rational(0));
    r.c.assign(n_terms + 1, Rational(0));
    r.c[1] = 1;
    r.a[1] = 1;
    for (int k = 1; k < n_terms; ++k) {
        r.c[k + 1] = r.c[k] * Rational((4 * k - 5) * (4 * k - 3)) / Rational(4 * k * (k + 1));
        r.a[k + 1] = Rational(5 - 4 * (k + 1)) * r.c[k + 1];
    }
    return r;
}

/// Cached double copies of the first kMaxCenterTerms coefficients.
inline const std::array<std::vector<double>, 2>& center_coefficients_double() {
    static const std::array<std::vector<double>, 2> cache = [] {
        CenterCoefficients q = center_coefficients(kMaxCenterTerms);
        std::array<std::vector<double>, 2> out;
        for (int k = 0; k <= kMaxCenterTerms; ++k) {
            out[0].push_back(to_double(q.a[k]));
            out[1].push_back(to_double(q.c[k]));
        }
        return out;
    }();
    return cache;
}

/// Largest s for which the double-precision center series is used by default.
inline constexpr double kCenterSeriesLimit = 0.08;

/// d^j/ds^j of kC1 * sum_{k>=1} coef[k] s^(k - shift), for j = 0..order. With shift = 1 this
/// is the series of I/I1 (the J functions), with shift = 0 the series of I itself.
inline std::array<double, 5> center_series_derivs(const std::vector<double>& coef, double s, int order, int shift,
                                                  int n_terms = kMaxCenterTerms) {
    std::array<double, 5> d{};
    int n = std::min<int>(n_terms, static_cast<int>(coef.size()) - 1);
    for (int j = 0; j <= order; ++j) {
        // sum_k coef[k] * p(p-1)...(p-j+1) * s^(p-j) with p = k - shift, summed from the top down
        double acc = 0.0;
        for (int k = n; k >= 1; --k) {
            int p = k - shift;
            if (p < j) continue;
            double fall = 1.0;
            for (int i = 0; i < j; ++i) fall *= (p - i);
            acc += coef[k] * fall * std::pow(s, p - j);
        }
        d[j] = kC1 * acc;
    }
    return d;
}

}  // namespace eightloop
