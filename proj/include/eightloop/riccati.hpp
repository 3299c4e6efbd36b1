#pragma once

// Projectivized Picard-Fuchs flows for ratios of the basic integrals and of the J = I / I1 functions.
// Every system has the form
//   dr/dt = A r^2 + (B1 h + B0) r + h,   dh/dt = -h (4h + 1).

#include "eightloop/center_series.hpp"
#include "eightloop/picard_fuchs.hpp"
#include "eightloop/quadrature.hpp"
#include "eightloop/zeros.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace eightloop {

enum class RiccatiId { Nu, Omega, U, V, W };

inline const char* to_string(RiccatiId id) {
    switch (id) {
        case RiccatiId::Nu: return "nu";
        case RiccatiId::Omega: return "omega";
        case RiccatiId::U: return "u";
        case RiccatiId::V: return "v";
        case RiccatiId::W: return "w";
    }
    return "?";
}

struct RiccatiSystem {
    RiccatiId id;
    double A, B1, B0;
    double saddle_r;  // saddle at (h, r) = (-1/4, saddle_r)
    double slope;     // dr/dh along the unstable manifold at the saddle

    std::array<double, 2> rhs(double h, double r) const {
        return {A * r * r + (B1 * h + B0) * r + h, -h * (4.0 * h + 1.0)};
    }

    /// Eigenvalue of the saddle in the r direction (the h direction has eigenvalue 1).
    double transverse_eigenvalue() const { return 2.0 * A * saddle_r - 0.25 * B1 + B0; }

    /// Roots of the horizontal isocline A r^2 + (B1 h + B0) r + h = 0 at h, ascending.
    std::array<double, 2> isocline(double h) const {
        double b = B1 * h + B0;
        double disc = std::max(0.0, b * b - 4.0 * A * h);
        double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        double r1, r2;
        if (q == 0.0) {
            r1 = r2 = 0.0;
        } else {
            r1 = q / A;
            r2 = h / q;
        }
        return {std::min(r1, r2), std::max(r1, r2)};
    }
};

/// The unstable direction of the saddle, from the analytic Jacobian.
inline double unstable_slope(double A, double B1, double B0, double r) {
    double kappa = 2.0 * A * r - 0.25 * B1 + B0;
    return (B1 * r + 1.0) / (1.0 - kappa);
}

inline RiccatiSystem riccati_system(RiccatiId id) {
    RiccatiSystem s{id, 0, 0, 0, 0, 0};
    switch (id) {
        case RiccatiId::Nu: s.A = 1.75, s.B1 = -2.0, s.B0 = -2.0, s.saddle_r = -1.0 / 7.0; break;
        case RiccatiId::Omega:
        case RiccatiId::U: s.A = -1.25, s.B1 = -2.0, s.B0 = 1.0, s.saddle_r = 1.0; break;
        case RiccatiId::V: s.A = 3.75, s.B1 = -2.0, s.B0 = 0.0, s.saddle_r = -1.0 / 3.0; break;
        case RiccatiId::W: s.A = 8.75, s.B1 = -2.0, s.B0 = -1.0, s.saddle_r = -1.0 / 7.0; break;
    }
    s.slope = unstable_slope(s.A, s.B1, s.B0, s.saddle_r);
    return s;
}

inline std::array<double, 2> riccati_rhs(const RiccatiSystem& sys, double h, double r) { return sys.rhs(h, r); }

enum class CurveSource { SeparatrixODE, IntegralRatio };

struct RatioCurve {
    std::vector<double> h, value;
    CurveSource source = CurveSource::SeparatrixODE;
    /// Max change of the curve when the launch offset is halved.
    double launch_sensitivity = 0.0;
};

struct SeparatrixOptions {
    double delta = 1e-8;
    double tol = 1e-13;
};

namespace detail {

inline std::vector<double> integrate_separatrix(const RiccatiSystem& sys, const std::vector<double>& grid, double delta,
                                                double tol) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    // The h-parametrized form dr/dh = F / (dh/dt) is regular at the launch point (its limit is the
    // eigen-slope) and the transverse direction is contracting, so one pass in h is enough.
    auto rhs = [&](const State& r, State& dr, double h) {
        auto f = sys.rhs(h, r[0]);
        dr[0] = f[0] / f[1];
    };
    double h0 = -0.25 + delta;
    State r{sys.saddle_r + sys.slope * delta};
    std::vector<double> times{h0};
    times.insert(times.end(), grid.begin(), grid.end());
    std::vector<double> out;
    auto obs = [&](const State& st, double) { out.push_back(st[0]); };
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    odeint::integrate_times(stepper, rhs, r, times.begin(), times.end(), delta * 0.1, obs);
    out.erase(out.begin());
    for (double v : out)
        if (!std::isfinite(v)) throw std::runtime_error("separatrix: step failure");
    return out;
}

}  // namespace detail

/// The unstable manifold of the saddle at h = -1/4, sampled on an ascending grid inside (-1/4, 0).
inline RatioCurve separatrix(const RiccatiSystem& sys, const std::vector<double>& grid, const SeparatrixOptions& opt = {}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > -0.25 + opt.delta && grid[i] < 0.0)) throw DomainError("separatrix: grid must lie inside (-1/4, 0)");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("separatrix: grid must be increasing");
    }
    RatioCurve c;
    c.h = grid;
    c.source = CurveSource::SeparatrixODE;
    c.value = detail::integrate_separatrix(sys, grid, opt.delta, opt.tol);
    std::vector<double> half = detail::integrate_separatrix(sys, grid, 0.5 * opt.delta, opt.tol);
    for (std::size_t i = 0; i < grid.size(); ++i)
        c.launch_sensitivity = std::max(c.launch_sensitivity, std::abs(half[i] - c.value[i]));
    return c;
}

/// Rows j = 0..order of (J0^(j), J2^(j)) with J = I / I1 on the right oval.
inline std::vector<std::array<double, 2>> j_derivatives(double h, int order) {
    if (order < 0 || order > 3) throw std::invalid_argument("j_derivatives: order must be 0..3");
    require_level(h);
    const double s = h + 0.25;
    std::vector<std::array<double, 2>> J(order + 1);
    if (s <= kCenterSeriesLimit) {
        const auto& c = center_coefficients_double();
        auto d0 = center_series_derivs(c[0], s, order, 1);
        auto d2 = center_series_derivs(c[1], s, order, 1);
        for (int j = 0; j <= order; ++j) J[j] = {d0[j] / kC1, d2[j] / kC1};
        return J;
    }
    // I = kC1 s J, so I^(k) = kC1 (s J^(k) + k J^(k-1)).
    BasisDerivatives D = basis_derivatives(h, order);
    for (int j = 0; j <= order; ++j) {
        for (int q = 0; q < 2; ++q) {
            double ik = D.rows[j][q == 0 ? 0 : 2] / kC1;
            J[j][q] = (ik - (j > 0 ? j * J[j - 1][q] : 0.0)) / s;
        }
    }
    return J;
}

/// The ratio each system's separatrix is claimed to equal, computed from the integrals.
inline double ratio_from_integrals(RiccatiId id, double h) {
    require_level(h);
    switch (id) {
        case RiccatiId::Omega: {
            auto I = basis_integrals(h);
            return I[2] / I[0];
        }
        case RiccatiId::Nu: {
            BasisDerivatives D = basis_derivatives(h, 3);
            return D.rows[3][2] / D.rows[3][0];
        }
        case RiccatiId::U: {
            auto J = j_derivatives(h, 0);
            return J[0][1] / J[0][0];
        }
        case RiccatiId::V: {
            auto J = j_derivatives(h, 1);
            return J[1][1] / J[1][0];
        }
        case RiccatiId::W: {
            auto J = j_derivatives(h, 2);
            return J[2][1] / J[2][0];
        }
    }
    return 0.0;
}

inline RatioCurve ratio_curve(RiccatiId id, const std::vector<double>& grid) {
    RatioCurve c;
    c.h = grid;
    c.source = CurveSource::IntegralRatio;
    for (double h : grid) c.value.push_back(ratio_from_integrals(id, h));
    return c;
}

/// Residual of nu = 4h (1 - omega) / (4h + omega) at h.
inline double nu_omega_residual(double h) {
    double om = ratio_from_integrals(RiccatiId::Omega, h);
    double nu = ratio_from_integrals(RiccatiId::Nu, h);
    return std::abs(nu - 4.0 * h * (1.0 - om) / (4.0 * h + om));
}

struct GeometryReport {
    bool increasing = false, decreasing = false, convex = false, concave = false;
    /// True when the separatrix stays strictly on the claimed side of its isocline branch.
    bool isocline_side = false;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Uniform interior grid of n points in (-1/4, 0).
inline std::vector<double> interior_grid(int n, double margin = 1e-4) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(-0.25 + margin + (0.25 - 2.0 * margin) * i / (n - 1));
    return g;
}

/// Checks monotonicity, convexity and the isocline side of the separatrix on an n-point grid.
inline GeometryReport check_geometry(const RiccatiSystem& sys, int n = 200) {
    std::vector<double> g = interior_grid(n);
    RatioCurve c = separatrix(sys, g);
    GeometryReport r;
    r.increasing = r.decreasing = r.convex = r.concave = r.isocline_side = true;
    for (int i = 0; i + 1 < n; ++i) {
        double d = c.value[i + 1] - c.value[i];
        if (!(d > 0)) r.increasing = false;
        if (!(d < 0)) r.decreasing = false;
    }
    for (int i = 1; i + 1 < n; ++i) {
        double d2 = c.value[i + 1] - 2.0 * c.value[i] + c.value[i - 1];
        if (!(d2 > 0)) r.convex = false;
        if (!(d2 < 0)) r.concave = false;
    }
    const bool upper = sys.id == RiccatiId::Omega || sys.id == RiccatiId::U;
    for (int i = 0; i < n; ++i) {
        auto iso = sys.isocline(g[i]);
        if (upper ? !(c.value[i] > iso[1]) : !(c.value[i] < iso[0])) r.isocline_side = false;
    }
    if (upper) {
        if (!r.decreasing) r.violations.push_back("not strictly decreasing");
        if (!r.concave) r.violations.push_back("not strictly concave");
        if (!r.isocline_side) r.violations.push_back("not above the upper isocline branch");
    } else {
        if (!r.increasing) r.violations.push_back("not strictly increasing");
        if (!r.convex) r.violations.push_back("not strictly convex");
        if (!r.isocline_side) r.violations.push_back("not below the lower isocline branch");
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// R0 = (alpha0 + alpha1 h) J0 + (gamma0 + gamma1 h) J2 and its derivatives
// R0^(k) = (a_k h + b_k) J0^(k) + (c_k h + d_k) J2^(k).

struct R0Coefficients {
    std::array<double, 3> a{}, b{}, c{}, d{};
};

inline R0Coefficients r0_coefficients(double alpha0, double alpha1, double gamma0, double gamma1) {
    R0Coefficients k;
    k.a[0] = alpha1, k.b[0] = alpha0, k.c[0] = gamma1, k.d[0] = gamma0;
    k.a[1] = -3.0 * alpha1 - 4.0 * gamma1;
    k.b[1] = alpha0;
    k.c[1] = 5.0 * gamma1;
    k.d[1] = gamma0 - 5.0 * alpha1 - 4.0 * gamma1;
    k.a[2] = k.a[1] / 5.0 + 4.0 * k.c[1] / 15.0;
    k.b[2] = k.b[1];
    k.c[2] = -k.c[1] / 3.0;
    k.d[2] = k.d[1] - k.a[1];
    return k;
}

struct R0Values {
    double r0 = 0, r1 = 0, r2 = 0;
    /// R0' and R0'' diverge logarithmically / like 1/h at the saddle level when alpha0 != 0.
    bool log_divergent = false;
};

/// R0 and its first two derivatives at h; the beta slots of the envelope are ignored.
inline R0Values r0_and_derivatives(const Envelope& e, double h) {
    require_level(h);
    R0Coefficients k = r0_coefficients(e.alpha0, e.alpha1, e.gamma0, e.gamma1);
    auto J = j_derivatives(h, 2);
    std::array<double, 3> v{};
    for (int j = 0; j < 3; ++j) v[j] = (k.a[j] * h + k.b[j]) * J[j][0] + (k.c[j] * h + k.d[j]) * J[j][1];
    R0Values r{v[0], v[1], v[2], false};
    r.log_divergent = e.alpha0 != 0.0 && std::abs(h) < kNearSingular;
    return r;
}

/// Endpoint values at the center level: R0, R0', R0'' at h = -1/4.
inline std::array<double, 3> r0_center_values(double alpha0, double alpha1, double gamma0, double gamma1) {
    return {alpha0 + gamma0 - 0.25 * alpha1 - 0.25 * gamma1,
            0.375 * alpha0 - 0.125 * gamma0 + 29.0 / 32.0 * alpha1 + 33.0 / 32.0 * gamma1,
            35.0 / 32.0 * alpha0 - 5.0 / 32.0 * gamma0 + 61.0 / 128.0 * alpha1 - 27.0 / 128.0 * gamma1};
}

/// R0 at the saddle level: sigma (4/3 alpha0 + 16/15 gamma0).
inline double r0_saddle_value(double alpha0, double gamma0) { return kSigma * (4.0 / 3.0 * alpha0 + 16.0 / 15.0 * gamma0); }

/// Number of zeros (with multiplicity) of R0^(k) on the level interval.
inline int count_r0_zeros(const Envelope& e, int k) {
    auto f = [&](double h) {
        R0Values v = r0_and_derivatives(e, h);
        return k == 0 ? v.r0 : (k == 1 ? v.r1 : v.r2);
    };
    ZeroOptions opt;
    opt.grid = 300;
    return count_zeros(f, opt).count_with_multiplicity;
}

/// Number of intersections of the nu-separatrix with the hyperbola r = (a h + b) / (c h + d).
inline int count_hyperbola_crossings(RiccatiId id, double a, double b, double c, double d) {
    auto f = [&](double h) { return (a * h + b) - (c * h + d) * ratio_from_integrals(id, h); };
    ZeroOptions opt;
    opt.grid = 300;
    return count_zeros(f, opt).count_with_multiplicity;
}

}  // namespace eightloop
