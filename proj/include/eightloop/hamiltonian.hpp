#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace eightloop {

/// Thrown when an argument lies outside the domain an operation documents.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class Annulus { Right, Left };

inline const char* to_string(Annulus a) { return a == Annulus::Right ? "right" : "left"; }

/// Energy level together with the choice of period annulus.
struct OvalSpec {
    double h = -0.125;
    Annulus annulus = Annulus::Right;
};

/// The 20 coefficients of the cubic perturbation f = sum a_ij x^i y^j, g = sum b_ij x^i y^j.
struct PerturbationCoeffs {
    // a[i][j] and b[i][j] are meaningful for i + j <= 3; the rest stay zero.
    std::array<std::array<double, 4>, 4> a{};
    std::array<std::array<double, 4>, 4> b{};

    double lambda() const { return 0.5 * a[1][1] + b[0][2]; }
    double mu() const { return a[2][1] + b[1][2]; }

    template <class T>
    T f(const T& x, const T& y) const { return eval(a, x, y); }
    template <class T>
    T g(const T& x, const T& y) const { return eval(b, x, y); }

    /// Conjugation by (x, y) -> (-x, -y): coefficients with i + j even change sign.
    PerturbationCoeffs point_reflected() const {
        PerturbationCoeffs q = *this;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; i + j < 4; ++j)
                if ((i + j) % 2 == 0) {
                    q.a[i][j] = -q.a[i][j];
                    q.b[i][j] = -q.b[i][j];
                }
        return q;
    }

    PerturbationCoeffs scaled(double k) const {
        PerturbationCoeffs q = *this;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                q.a[i][j] *= k;
                q.b[i][j] *= k;
            }
        return q;
    }

    bool all_finite() const {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (!std::isfinite(a[i][j]) || !std::isfinite(b[i][j])) return false;
        return true;
    }

private:
    template <class T>
    static T eval(const std::array<std::array<double, 4>, 4>& c, const T& x, const T& y) {
        // Horner in y for each power of x.
        T total = T(0);
        T xp = T(1);
        for (int i = 0; i < 4; ++i) {
            T col = T(0);
            for (int j = 3 - i; j >= 0; --j) col = col * y + T(c[i][j]);
            total += col * xp;
            xp *= x;
        }
        return total;
    }
};

template <class T>
T hamiltonian_value(const T& x, const T& y) {
    T x2 = x * x;
    return T(0.5) * y * y - T(0.5) * x2 + T(0.25) * x2 * x2;
}

inline void require_level(double h) {
    if (!(h >= -0.25 && h <= 0.0)) throw DomainError("energy level outside [-1/4, 0]: " + std::to_string(h));
}

/// Turning points of the oval on the x-axis.
inline std::pair<double, double> oval_x_range(const OvalSpec& spec) {
    require_level(spec.h);
    double r = std::sqrt(std::max(0.0, 1.0 + 4.0 * spec.h));
    double hi = std::sqrt(1.0 + r);
    // x_lo^2 = 1 - r loses digits near h = 0; use x_lo^2 x_hi^2 = -4h instead.
    double lo = std::sqrt(-4.0 * spec.h) / hi;
    if (spec.annulus == Annulus::Right) return {lo, hi};
    return {-hi, -lo};
}

inline constexpr double kRadicandClamp = 1e-14;

/// Upper branch y(x) of the level set H = h.
inline double oval_height(double x, const OvalSpec& spec) {
    double x2 = x * x;
    double rad = 2.0 * spec.h + x2 - 0.5 * x2 * x2;
    if (rad < 0.0) {
        if (rad < -kRadicandClamp) throw DomainError("point outside the oval's x-range");
        rad = 0.0;
    }
    return std::sqrt(rad);
}

/// Right-hand side of the perturbed system.
template <class T>
std::pair<T, T> vector_field(const T& x, const T& y, const PerturbationCoeffs& p, const T& eps) {
    return {y + eps * p.f(x, y), x - x * x * x + eps * p.g(x, y)};
}

}  // namespace eightloop
