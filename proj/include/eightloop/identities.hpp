#pragma once

// Polynomial one-form identities of the form
//   LHS = P(x, y, H) dx + d(...) + G(x, y, H) dH,
// checked as cycle-integral equalities on the ovals, and as exactness of LHS - P dx - G dH
// (integral over arbitrary circles vanishes) with H the Hamiltonian itself.

#include "eightloop/hamiltonian.hpp"
#include "eightloop/quadrature.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace eightloop {

enum class IdentityId { I1, II1, II2, II3, II4, II5, II6, III1, III2, III3, III4, III5, IV1, IV2, IV3 };

inline constexpr std::array<IdentityId, 15> kAllIdentities = {
    IdentityId::I1,   IdentityId::II1,  IdentityId::II2,  IdentityId::II3,  IdentityId::II4,
    IdentityId::II5,  IdentityId::II6,  IdentityId::III1, IdentityId::III2, IdentityId::III3,
    IdentityId::III4, IdentityId::III5, IdentityId::IV1,  IdentityId::IV2,  IdentityId::IV3};

inline const char* to_string(IdentityId id) {
    switch (id) {
        case IdentityId::I1: return "I-1";
        case IdentityId::II1: return "II-1";
        case IdentityId::II2: return "II-2";
        case IdentityId::II3: return "II-3";
        case IdentityId::II4: return "II-4";
        case IdentityId::II5: return "II-5";
        case IdentityId::II6: return "II-6";
        case IdentityId::III1: return "III-1";
        case IdentityId::III2: return "III-2";
        case IdentityId::III3: return "III-3";
        case IdentityId::III4: return "III-4";
        case IdentityId::III5: return "III-5";
        case IdentityId::IV1: return "IV-1";
        case IdentityId::IV2: return "IV-2";
        case IdentityId::IV3: return "IV-3";
    }
    return "?";
}

inline bool is_iv_family(IdentityId id) {
    return id == IdentityId::IV1 || id == IdentityId::IV2 || id == IdentityId::IV3;
}

/// Polynomial in x, ascending coefficients.
struct PolyX {
    std::vector<double> c;

    double operator()(double x) const {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
        return v;
    }
    PolyX operator*(const PolyX& o) const {
        PolyX r;
        if (c.empty() || o.c.empty()) return r;
        r.c.assign(c.size() + o.c.size() - 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
    PolyX derivative() const {
        PolyX r;
        for (std::size_t i = 1; i < c.size(); ++i) r.c.push_back(c[i] * static_cast<double>(i));
        return r;
    }
    /// Antiderivative vanishing at 0.
    PolyX integral() const {
        PolyX r;
        r.c.push_back(0.0);
        for (std::size_t i = 0; i < c.size(); ++i) r.c.push_back(c[i] / static_cast<double>(i + 1));
        return r;
    }
};

/// One identity split into its parts. LHS(x, y, dx, dy) is the left form; P and G take the value
/// used for H as their last argument. Exact differentials are dropped.
struct IdentityForms {
    std::function<double(double, double, double, double)> lhs;
    std::function<double(double, double, double)> P;
    std::function<double(double, double, double)> G;
};

inline IdentityForms identity_forms(IdentityId id, double lambda = 1.0, double mu = 0.0) {
    const PolyX q1{{0.0, -2.0 * lambda, -mu}};
    const PolyX dq1 = q1.derivative();
    const PolyX hx{{0.0, -1.0, 0.0, 1.0}};  // x^3 - x
    const PolyX Q1 = (q1 * hx).integral();
    const PolyX Q2 = (q1 * q1 * hx).integral();
    const PolyX V{{0.0, 0.0, -0.5, 0.0, 0.25}};  // x^4/4 - x^2/2
    const PolyX Q3 = (q1 * hx * V).integral();
    auto dxform = [](std::function<double(double, double)> f) {
        return [f](double x, double y, double dx, double) { return f(x, y) * dx; };
    };
    auto zero = [](double, double, double) { return 0.0; };
    IdentityForms F;
    F.G = zero;
    F.P = zero;
    switch (id) {
        case IdentityId::I1:
            F.lhs = dxform([](double, double y) { return y * y * y; });
            F.P = [](double x, double y, double H) { return 3.0 / 7.0 * x * x * y + 12.0 / 7.0 * y * H; };
            F.G = [](double x, double y, double) { return -3.0 / 7.0 * x * y; };
            break;
        case IdentityId::II1:
            F.lhs = dxform([](double, double y) { return y * y; });
            F.G = [](double x, double, double) { return -2.0 * x; };
            break;
        case IdentityId::II2:
            F.lhs = dxform([](double x, double y) { return x * y * y; });
            F.G = [](double x, double, double) { return -x * x; };
            break;
        case IdentityId::II3:
            F.lhs = dxform([](double x, double y) { return x * x * x * y; });
            F.P = [](double x, double y, double) { return x * y; };
            F.G = [](double, double y, double) { return y; };
            break;
        case IdentityId::II4:
            F.lhs = dxform([](double x, double y) { return x * x * x * x * y; });
            F.P = [](double x, double y, double H) { return 8.0 / 7.0 * x * x * y + 4.0 / 7.0 * y * H; };
            F.G = [](double x, double y, double) { return 6.0 / 7.0 * x * y; };
            break;
        case IdentityId::II5:
            F.lhs = dxform([](double x, double y) { return x * y * y * y; });
            F.P = [](double x, double y, double H) { return 3.0 / 8.0 * (1.0 + 4.0 * H) * x * y; };
            F.G = [](double x, double y, double) { return 3.0 / 8.0 * (1.0 - x * x) * y; };
            break;
        case IdentityId::II6:
            F.lhs = dxform([](double x, double y) { return x * x * y * y * y; });
            F.P = [](double x, double y, double H) {
                return 4.0 / 21.0 * y * H + 8.0 / 21.0 * x * x * y + 4.0 / 3.0 * x * x * y * H;
            };
            F.G = [](double x, double y, double) { return 2.0 / 7.0 * x * y - 1.0 / 3.0 * x * x * x * y; };
            break;
        case IdentityId::III1:
            F.lhs = dxform([](double x, double y) { return x * x * y * y; });
            F.G = [](double x, double, double) { return -2.0 / 3.0 * x * x * x; };
            break;
        case IdentityId::III2:
            F.lhs = dxform([](double x, double y) { return x * x * x * y * y; });
            F.G = [](double x, double, double) { return -0.5 * x * x * x * x; };
            break;
        case IdentityId::III3:
            F.lhs = dxform([](double, double y) { return y * y * y * y; });
            F.G = [](double x, double, double H) {
                return -(8.0 * x * H + 4.0 / 3.0 * x * x * x - 0.4 * std::pow(x, 5));
            };
            break;
        case IdentityId::III4:
            F.lhs = dxform([](double x, double y) { return x * y * y * y * y; });
            F.G = [](double x, double, double H) {
                return -(4.0 * x * x * H + std::pow(x, 4) - 1.0 / 3.0 * std::pow(x, 6));
            };
            break;
        case IdentityId::III5:
            F.lhs = dxform([](double x, double y) { return std::pow(x, 5) * y; });
            F.P = [](double x, double y, double H) { return (1.25 + H) * x * y; };
            F.G = [](double x, double y, double) { return (1.25 + 0.75 * x * x) * y; };
            break;
        case IdentityId::IV1:
            F.lhs = [dq1](double x, double y, double dx, double) { return std::pow(y, 4) * dq1(x) * dx; };
            F.G = [Q1, q1](double x, double y, double) { return -(8.0 * Q1(x) + 4.0 * y * y * q1(x)); };
            break;
        case IdentityId::IV2:
            F.lhs = [q1, dq1](double x, double y, double dx, double) { return q1(x) * std::pow(y, 4) * dq1(x) * dx; };
            F.G = [Q2, q1](double x, double y, double) { return -(4.0 * Q2(x) + 2.0 * y * y * q1(x) * q1(x)); };
            break;
        case IdentityId::IV3:
            F.lhs = [dq1](double x, double y, double dx, double) { return std::pow(y, 6) * dq1(x) * dx; };
            F.G = [Q1, Q3, q1](double x, double y, double H) {
                return 48.0 * Q3(x) - 48.0 * H * Q1(x) - 6.0 * std::pow(y, 4) * q1(x);
            };
            break;
    }
    return F;
}

struct IdentityResidual {
    double lhs = 0.0;     // cycle integral of the left side
    double rhs = 0.0;     // cycle integral of P(x, y, h) dx
    double residual = 0.0;
};

/// On the oval dH = 0 and H = h, so the identity reduces to the equality of two cycle integrals.
inline IdentityResidual verify_identity(IdentityId id, const OvalSpec& spec, double lambda = 1.0, double mu = 0.0,
                                        double tol = kDefaultTolerance) {
    IdentityForms F = identity_forms(id, lambda, mu);
    const double h = spec.h;
    IdentityResidual r;
    r.lhs = cycle_integral_fn(F.lhs, spec, tol).value;
    r.rhs = cycle_integral_fn([&](double x, double y, double dx, double) { return F.P(x, y, h) * dx; }, spec, tol).value;
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

/// Integral of LHS - P dx - G dH over the circle of radius rho about (cx, cy), with H = H(x, y).
/// A polynomial one-form is exact exactly when all such integrals vanish. The integrand is a
/// trigonometric polynomial of low degree, so the periodic trapezoid rule is exact up to rounding.
inline double identity_exactness_residual(IdentityId id, double cx, double cy, double rho, double lambda = 1.0,
                                          double mu = 0.0, int n = 256) {
    IdentityForms F = identity_forms(id, lambda, mu);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * std::numbers::pi * i / n;
        double x = cx + rho * std::cos(t), y = cy + rho * std::sin(t);
        double dx = -rho * std::sin(t), dy = rho * std::cos(t);
        double H = hamiltonian_value(x, y);
        double dH = (x * x * x - x) * dx + y * dy;
        acc += F.lhs(x, y, dx, dy) - F.P(x, y, H) * dx - F.G(x, y, H) * dH;
    }
    return std::abs(acc * 2.0 * std::numbers::pi / n);
}

}  // namespace eightloop
