#pragma once

#include "eightloop/center_series.hpp"
#include "eightloop/quadrature.hpp"
#include "eightloop/rational.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace eightloop {

struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]

    std::array<double, 2> operator*(const std::array<double, 2>& v) const {
        return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(double k) const { return {a * k, b * k, c * k, d * k}; }
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        double D = det();
        return {d / D, -b / D, -c / D, a / D};
    }
    double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }
};

/// I = A(h) I' for I = (I0, I2).
inline Mat2 pf_apply(double h) { return {4.0 * h / 3.0, 1.0 / 3.0, 4.0 * h / 15.0, 4.0 * (3.0 * h + 1.0) / 15.0}; }

/// Shared denominator h(4h + 1) of the derivative matrices.
inline double pf_denominator(double h) { return h * (4.0 * h + 1.0); }

/// Numerators B_k(h) of A_k = B_k / (h(4h+1)), with I^(k) = A_k I^(k-1).
inline Mat2 pf_numerator(int k, double h) {
    switch (k) {
        case 1: return {3.0 * h + 1.0, -1.25, -h, 5.0 * h};
        case 2: return {-h, -0.25, -h, h};
        case 3: return {-(5.0 * h + 1.0), 0.75, -h, -3.0 * h};
        case 4: return {-(9.0 * h + 2.0), 1.75, -h, -7.0 * h};
        default: throw std::invalid_argument("pf_numerator: k must be 1..4");
    }
}

inline Mat2 pf_derivative_matrix(int k, double h) { return pf_numerator(k, h) * (1.0 / pf_denominator(h)); }

inline constexpr double kNearSingular = 1e-6;

/// Derivatives of the basic integrals: rows j = 0..order hold (I0^(j), I1^(j), I2^(j)).
struct BasisDerivatives {
    std::vector<std::array<double, 3>> rows;
    bool near_singular = false;
};

/// Chains I^(k) = A_k I^(k-1) starting from given values of I0(h), I2(h).
inline BasisDerivatives derivatives_via_pf(double h, int order, double I0, double I2) {
    if (order < 0 || order > 4) throw std::invalid_argument("derivatives_via_pf: order must be 0..4");
    BasisDerivatives out;
    out.near_singular = std::abs(pf_denominator(h)) < kNearSingular;
    std::array<double, 2> v{I0, I2};
    double s = h + 0.25;
    out.rows.push_back({I0, kC1 * s, I2});
    for (int k = 1; k <= order; ++k) {
        v = pf_derivative_matrix(k, h) * v;
        out.rows.push_back({v[0], k == 1 ? kC1 : 0.0, v[1]});
    }
    return out;
}

inline BasisDerivatives derivatives_via_pf(double h, int order) {
    require_level(h);
    OvalSpec sp{h, Annulus::Right};
    return derivatives_via_pf(h, order, basic_integral(0, sp).value, basic_integral(2, sp).value);
}

/// Derivatives of (I0, I1, I2) up to `order`, taking the center series close to h = -1/4
/// and the Picard-Fuchs chain elsewhere.
inline BasisDerivatives basis_derivatives(double h, int order) {
    double s = h + 0.25;
    if (s <= kCenterSeriesLimit) {
        const auto& cd = center_coefficients_double();
        auto d0 = center_series_derivs(cd[0], s, order, 0);
        auto d2 = center_series_derivs(cd[1], s, order, 0);
        BasisDerivatives out;
        for (int j = 0; j <= order; ++j) out.rows.push_back({d0[j], j == 0 ? kC1 * s : (j == 1 ? kC1 : 0.0), d2[j]});
        return out;
    }
    return derivatives_via_pf(h, order);
}

enum class SeriesCenter { AtCenter, AtZero };

/// Truncated expansions of the basic integrals at either end of the energy interval.
/// AtCenter: I0 = scale sum coeffs_I0[k] s^k, I2 = scale sum coeffs_I2[k] s^k, s = h + 1/4.
/// AtZero: J = I / I1 = scale (psi + phi log(-h)) + fitted_const phi, where psi has coefficients
/// coeffs_I0 / coeffs_I2 and phi (the log channel) has log_coeffs_I0 / log_coeffs_I2, all in powers of h.
struct SeriesExpansion {
    SeriesCenter center = SeriesCenter::AtCenter;
    std::vector<Rational> coeffs_I0, coeffs_I2;
    std::vector<Rational> log_coeffs_I0, log_coeffs_I2;
    double scale = kC1;
    double fitted_const = 0.0;

    /// (I0, I2) at the center, (J0, J2) at zero.
    std::array<double, 2> evaluate(double h) const;
};

inline SeriesExpansion series_at_center(int n_terms) {
    CenterCoefficients c = center_coefficients(n_terms);
    SeriesExpansion e;
    e.center = SeriesCenter::AtCenter;
    e.coeffs_I0 = c.a;
    e.coeffs_I2 = c.c;
    e.scale = kC1;
    return e;
}

/// Closed forms a_k = (4k-5)!!/(4^(k-1)(k-1)!k!), c_k = -(4k-7)!!/(4^(k-1)(k-1)!k!) for k >= 2.
inline Rational center_closed_form_a(int k) {
    if (k == 1) return 1;
    return Rational(double_factorial(4 * k - 5)) / Rational((BigInt(1) << (2 * (k - 1))) * factorial(k - 1) * factorial(k));
}
inline Rational center_closed_form_c(int k) {
    if (k == 1) return 1;
    return -Rational(double_factorial(4 * k - 7)) / Rational((BigInt(1) << (2 * (k - 1))) * factorial(k - 1) * factorial(k));
}

inline constexpr double kSigma = 2.0 * std::numbers::sqrt2 / std::numbers::pi;
inline constexpr int kMaxZeroTerms = 24;
inline constexpr double kZeroFitLevel = -1e-3;

namespace detail {

/// Coefficients of the solutions of J = M(h) J', M = [[-4h, -5], [-4h, 4h-4]], at h = 0.
/// phi is analytic with phi0 = -h + ...; psi = (analytic part) + phi log(-h), normalized by
/// the choice of the free h coefficient -11/6 of the analytic part of psi0.
struct ZeroChannels {
    std::vector<Rational> p, q, r, t;
};

inline ZeroChannels zero_channels(int n) {
    ZeroChannels z;
    z.p.assign(n + 2, Rational(0));
    z.q.assign(n + 2, Rational(0));
    z.r.assign(n + 2, Rational(0));
    z.t.assign(n + 2, Rational(0));
    z.p[1] = -1;
    for (int m = 1; m + 1 <= n + 1; ++m) {
        z.q[m + 1] = -Rational(1 + 4 * m) * z.p[m] / Rational(5 * (m + 1));
        z.p[m + 1] = Rational(5 * (4 * (m + 1) - 1)) * z.q[m + 1] / Rational(4 * m);
    }
    z.r[0] = rat(4, 3);
    z.t[0] = rat(16, 15);
    z.t[1] = rat(-4, 15);
    z.r[1] = rat(-11, 6);
    for (int m = 1; m + 1 <= n + 1; ++m) {
        z.t[m + 1] = -(Rational(1 + 4 * m) * z.r[m] + 4 * z.p[m] + 5 * z.q[m + 1]) / Rational(5 * (m + 1));
        int k = m + 1;
        z.r[k] = (Rational(1 - 4 * k) * z.t[k] + rat(4, 5) * z.p[k] - 4 * z.q[k]) * Rational(5) / Rational(4 - 4 * k);
    }
    return z;
}

inline double horner(const std::vector<Rational>& c, double h) {
    double acc = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) acc = acc * h + to_double(c[k]);
    return acc;
}

}  // namespace detail

inline std::array<double, 2> SeriesExpansion::evaluate(double h) const {
    if (center == SeriesCenter::AtCenter) {
        double s = h + 0.25;
        return {scale * detail::horner(coeffs_I0, s), scale * detail::horner(coeffs_I2, s)};
    }
    if (!(h < 0.0)) throw DomainError("zero-end series needs h < 0");
    double L = std::log(-h);
    double f0 = detail::horner(log_coeffs_I0, h), f2 = detail::horner(log_coeffs_I2, h);
    double p0 = detail::horner(coeffs_I0, h) + f0 * L, p2 = detail::horner(coeffs_I2, h) + f2 * L;
    return {scale * p0 + fitted_const * f0, scale * p2 + fitted_const * f2};
}

/// Expansion at h = 0 with n_terms powers of h per channel; the constant multiplying phi is
/// fitted once from quadrature of J0 at h = -1e-3.
inline SeriesExpansion series_at_zero(int n_terms) {
    if (n_terms < 1 || n_terms > kMaxZeroTerms) throw std::invalid_argument("series_at_zero: n_terms out of range");
    detail::ZeroChannels z = detail::zero_channels(n_terms);
    SeriesExpansion e;
    e.center = SeriesCenter::AtZero;
    e.coeffs_I0.assign(z.r.begin(), z.r.begin() + n_terms);
    e.coeffs_I2.assign(z.t.begin(), z.t.begin() + n_terms);
    e.log_coeffs_I0.assign(z.p.begin(), z.p.begin() + n_terms);
    e.log_coeffs_I2.assign(z.q.begin(), z.q.begin() + n_terms);
    e.scale = kSigma;
    e.fitted_const = 0.0;
    double h = kZeroFitLevel;
    OvalSpec sp{h, Annulus::Right};
    double J0 = basic_integral(0, sp).value / (kC1 * (h + 0.25));
    double unfitted = e.evaluate(h)[0];
    e.fitted_const = (J0 - unfitted) / detail::horner(e.log_coeffs_I0, h);
    return e;
}

}  // namespace eightloop
