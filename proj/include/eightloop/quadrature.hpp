#pragma once

#include "eightloop/center_series.hpp"
#include "eightloop/hamiltonian.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eightloop {

struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegralValue {
    double value = 0.0;
    double est_error = 0.0;
};

inline constexpr double kDefaultTolerance = 1e-11;
inline constexpr double kPanicTolerance = 1e-7;
/// Below this distance from the center level the basic integrals come from the center series.
inline constexpr double kNearCenter = 1e-4;

/// Bivariate polynomial sum c[k][l] x^k y^l with k, l <= 10.
struct Poly2 {
    static constexpr int N = 11;
    std::array<std::array<double, N>, N> c{};

    double operator()(double x, double y) const {
        double total = 0.0, xp = 1.0;
        for (int k = 0; k < N; ++k) {
            double col = 0.0;
            for (int l = N - 1; l >= 0; --l) col = col * y + c[k][l];
            total += col * xp;
            xp *= x;
        }
        return total;
    }
    double& at(int k, int l) { return c.at(k).at(l); }
    double at(int k, int l) const { return c.at(k).at(l); }

    /// Partial derivatives, as polynomials.
    Poly2 dx() const {
        Poly2 r;
        for (int k = 1; k < N; ++k)
            for (int l = 0; l < N; ++l) r.c[k - 1][l] = k * c[k][l];
        return r;
    }
    Poly2 dy() const {
        Poly2 r;
        for (int k = 0; k < N; ++k)
            for (int l = 1; l < N; ++l) r.c[k][l - 1] = l * c[k][l];
        return r;
    }
};

/// The one-form P dx + Q dy.
struct OneForm {
    Poly2 P;
    Poly2 Q;
};

/// Exact form dF.
inline OneForm exact_form(const Poly2& F) { return {F.dx(), F.dy()}; }

/// Smooth parametrization of an oval: x = c - r cos(t), y = r sin(t) phi(x), t in [0, 2 pi].
/// t in [0, pi] is the upper arc, traversed left to right, i.e. the direction of the unperturbed flow.
struct OvalParam {
    double a = 0, b = 0, c = 0, r = 0, e1 = 0, e2 = 0;

    explicit OvalParam(const OvalSpec& spec) {
        auto [lo, hi] = oval_x_range(spec);
        a = lo;
        b = hi;
        c = 0.5 * (a + b);
        r = 0.5 * (b - a);
        // the other two roots of y^2 = 0 are the mirror images of the turning points
        e1 = -lo;
        e2 = -hi;
    }
    double x(double t) const { return c - r * std::cos(t); }
    double phi(double x) const { return std::sqrt(0.5 * (x - e1) * (x - e2)); }

    struct Point {
        double x, y, dx, dy;
    };
    Point point(double t) const {
        double st = std::sin(t), ct = std::cos(t);
        double xv = c - r * ct;
        double ph = phi(xv);
        double dxv = r * st;
        double dph = (2.0 * xv - e1 - e2) / (4.0 * ph);
        return {xv, r * st * ph, dxv, r * ct * ph + r * st * dph * dxv};
    }
};

namespace detail {

template <class F>
IntegralValue gk(F&& f, double lo, double hi, double tol) {
    double err = 0.0, l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14, &err, &l1);
    err = std::max(err, 4e-16 * l1);
    if (!std::isfinite(v)) throw ToleranceError("quadrature produced a non-finite value");
    if (err > tol) throw ToleranceError("quadrature tolerance not met: " + std::to_string(err));
    return {v, err};
}

inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

}  // namespace detail

/// I_k over the right oval computed directly by quadrature, with no series delegation.
inline IntegralValue basic_integral_quadrature(int k, const OvalSpec& spec, double tol = kDefaultTolerance) {
    OvalParam o(spec);
    if (o.r == 0.0) return {0.0, 0.0};
    // 2 * int x^k y dx over the upper arc
    auto f = [&](double t) {
        double st = std::sin(t);
        double xv = o.x(t);
        return 2.0 * o.r * o.r * st * st * o.phi(xv) * detail::ipow(xv, k);
    };
    return detail::gk(f, 0.0, std::numbers::pi, tol);
}

/// I_k(h) = integral of x^k y dx over the oval, oriented by the unperturbed flow (I_k > 0 on the right oval).
inline IntegralValue basic_integral(int k, const OvalSpec& spec, double tol = kDefaultTolerance) {
    if (k < 0 || k > 8) throw std::invalid_argument("basic_integral: k must be in 0..8");
    require_level(spec.h);
    double s = spec.h + 0.25;
    double sign = (spec.annulus == Annulus::Left && k % 2 == 1) ? -1.0 : 1.0;
    if (s < kNearCenter) {
        // Center series for I0, I2, closed form for I1, and the reduction
        // I_k = 2/(k+3) (k I_{k-2} + 2 (k-3) h I_{k-4}) for k >= 3.
        const auto& cd = center_coefficients_double();
        std::array<double, 9> I{};
        I[0] = center_series_derivs(cd[0], s, 0, 0, 20)[0];
        I[1] = kC1 * s;
        I[2] = center_series_derivs(cd[1], s, 0, 0, 20)[0];
        for (int j = 3; j <= k; ++j)
            I[j] = 2.0 / (j + 3) * (j * I[j - 2] + (j >= 4 ? 2.0 * (j - 3) * spec.h * I[j - 4] : 0.0));
        return {sign * I[k], 1e-16 * std::abs(I[k]) + 1e-300};
    }
    IntegralValue v = basic_integral_quadrature(k, {spec.h, Annulus::Right}, tol);
    v.value *= sign;
    return v;
}

/// I_kl(h) = integral of x^k y^l dx over the oval; identically zero for even l.
inline IntegralValue general_integral(int k, int l, const OvalSpec& spec, double tol = kDefaultTolerance) {
    if (k < 0 || k > 8 || l < 0 || l > 6) throw std::invalid_argument("general_integral: need k <= 8, l <= 6");
    require_level(spec.h);
    if (l % 2 == 0) return {0.0, 0.0};
    if (l == 1) return basic_integral(k, spec, tol);
    OvalParam o(spec);
    if (o.r == 0.0) return {0.0, 0.0};
    auto f = [&](double t) {
        double st = std::sin(t);
        double xv = o.x(t);
        double y = o.r * st * o.phi(xv);
        return 2.0 * detail::ipow(xv, k) * detail::ipow(y, l) * o.r * st;
    };
    return detail::gk(f, 0.0, std::numbers::pi, tol);
}

/// Integral of a polynomial one-form over the oval in the flow orientation.
inline IntegralValue cycle_integral(const OneForm& form, const OvalSpec& spec, double tol = kDefaultTolerance) {
    require_level(spec.h);
    OvalParam o(spec);
    if (o.r == 0.0) return {0.0, 0.0};
    auto f = [&](double t) {
        auto pt = o.point(t);
        return form.P(pt.x, pt.y) * pt.dx + form.Q(pt.x, pt.y) * pt.dy;
    };
    IntegralValue up = detail::gk(f, 0.0, std::numbers::pi, tol);
    IntegralValue down = detail::gk(f, std::numbers::pi, 2.0 * std::numbers::pi, tol);
    return {up.value + down.value, up.est_error + down.est_error};
}

/// Generic scalar line integral over the oval: integral of F(x, y, dx/dt, dy/dt) dt.
inline IntegralValue cycle_integral_fn(const std::function<double(double, double, double, double)>& F,
                                       const OvalSpec& spec, double tol = kDefaultTolerance) {
    require_level(spec.h);
    OvalParam o(spec);
    if (o.r == 0.0) return {0.0, 0.0};
    auto f = [&](double t) {
        auto pt = o.point(t);
        return F(pt.x, pt.y, pt.dx, pt.dy);
    };
    IntegralValue up = detail::gk(f, 0.0, std::numbers::pi, tol);
    IntegralValue down = detail::gk(f, std::numbers::pi, 2.0 * std::numbers::pi, tol);
    return {up.value + down.value, up.est_error + down.est_error};
}

/// (I0, I1, I2) on the right oval.
inline std::array<double, 3> basis_integrals(double h, double tol = kDefaultTolerance) {
    OvalSpec sp{h, Annulus::Right};
    return {basic_integral(0, sp, tol).value, kC1 * (h + 0.25), basic_integral(2, sp, tol).value};
}

}  // namespace eightloop
