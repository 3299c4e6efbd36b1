#pragma once

#include "eightloop/center_series.hpp"
#include "eightloop/hamiltonian.hpp"
#include "eightloop/linalg.hpp"
#include "eightloop/quadrature.hpp"
#include "eightloop/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eightloop {

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// (alpha0 + alpha1 h) I0 + (beta0 + beta1 h) I1 + (gamma0 + gamma1 h) I2.
///
/// Coefficients always refer to the integrals over the right oval. A left-annulus envelope
/// stores the coefficients of M*, i.e. the right-annulus formula with beta0, beta1 negated,
/// so evaluation never needs the annulus flag.
struct Envelope {
    double alpha0 = 0, alpha1 = 0, beta0 = 0, beta1 = 0, gamma0 = 0, gamma1 = 0;
    int order = 2;
    Annulus annulus = Annulus::Right;

    std::array<double, 6> coeffs() const { return {alpha0, alpha1, beta0, beta1, gamma0, gamma1}; }
    double max_abs() const {
        double m = 0;
        for (double c : coeffs()) m = std::max(m, std::abs(c));
        return m;
    }
    bool is_zero(double tol = 0.0) const { return max_abs() <= tol; }
    /// The envelope of the other annulus.
    Envelope mirrored() const {
        Envelope e = *this;
        e.beta0 = -beta0;
        e.beta1 = -beta1;
        e.annulus = annulus == Annulus::Right ? Annulus::Left : Annulus::Right;
        return e;
    }
    double evaluate(double h, const std::array<double, 3>& I) const {
        return (alpha0 + alpha1 * h) * I[0] + (beta0 + beta1 * h) * I[1] + (gamma0 + gamma1 * h) * I[2];
    }
};

/// Exact counterpart of Envelope.
struct RationalEnvelope {
    Rational alpha0, alpha1, beta0, beta1, gamma0, gamma1;

    Envelope to_double(int order = 2, Annulus an = Annulus::Right) const {
        using eightloop::to_double;
        return {to_double(alpha0), to_double(alpha1), to_double(beta0), to_double(beta1),
                to_double(gamma0), to_double(gamma1), order, an};
    }
    RationalEnvelope mirrored() const { return {alpha0, alpha1, -beta0, -beta1, gamma0, gamma1}; }
};

inline double evaluate_envelope(const Envelope& e, const OvalSpec& spec) {
    require_level(spec.h);
    return e.evaluate(spec.h, basis_integrals(spec.h));
}

namespace detail {

inline double coeff_scale(const PerturbationCoeffs& p) {
    double m = 1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; i + j < 4; ++j) m = std::max({m, std::abs(p.a[i][j]), std::abs(p.b[i][j])});
    return m;
}

inline Envelope finish(Envelope e, Annulus an) {
    e.annulus = an;
    if (an == Annulus::Left) {
        e.beta0 = -e.beta0;
        e.beta1 = -e.beta1;
    }
    return e;
}

}  // namespace detail

/// Tolerance used for the exact-zero tests on coefficient combinations (relative to the largest coefficient).
inline constexpr double kVanishTol = 1e-12;

inline Envelope m1_envelope(const PerturbationCoeffs& p, Annulus an = Annulus::Right) {
    const auto& a = p.a;
    const auto& b = p.b;
    Envelope e;
    e.order = 1;
    e.alpha0 = a[1][0] + b[0][1];
    e.alpha1 = 4.0 / 7.0 * (a[1][2] + 3.0 * b[0][3]);
    e.beta0 = 2.0 * a[2][0] + b[1][1];
    e.gamma0 = 3.0 * a[3][0] + b[2][1] + (a[1][2] + 3.0 * b[0][3]) / 7.0;
    return detail::finish(e, an);
}

/// Names the first failing condition for the first-order envelope to vanish, if any.
inline std::optional<std::string> m1_violation(const PerturbationCoeffs& p) {
    const auto& a = p.a;
    const auto& b = p.b;
    double tol = kVanishTol * detail::coeff_scale(p);
    if (std::abs(a[1][0] + b[0][1]) > tol) return "a10 + b01 = 0";
    if (std::abs(a[1][2] + 3.0 * b[0][3]) > tol) return "a12 + 3 b03 = 0";
    if (std::abs(2.0 * a[2][0] + b[1][1]) > tol) return "2 a20 + b11 = 0";
    if (std::abs(3.0 * a[3][0] + b[2][1]) > tol) return "3 a30 + b21 = 0";
    return std::nullopt;
}

inline Envelope m2_envelope(const PerturbationCoeffs& p, Annulus an = Annulus::Right) {
    if (auto v = m1_violation(p)) throw PreconditionError("first-order envelope does not vanish: need " + *v);
    const auto& a = p.a;
    double L = p.lambda(), M = p.mu();
    Envelope e;
    e.order = 2;
    e.alpha0 = -2.0 * a[0][0] * L;
    e.alpha1 = -8.0 / 7.0 * a[0][2] * L - (8.0 / 7.0 * a[3][0] + 8.0 / 63.0 * a[1][2]) * M;
    e.beta0 = -2.0 * (a[1][0] + a[3][0] + a[1][2] / 8.0) * L - 2.0 * (a[0][0] + a[2][0] + a[0][2] / 8.0) * M;
    e.beta1 = -a[1][2] * L - a[0][2] * M;
    e.gamma0 = -2.0 * (a[2][0] + a[0][2] / 7.0) * L - 2.0 * (a[1][0] + 8.0 / 7.0 * a[3][0] + 8.0 / 63.0 * a[1][2]) * M;
    e.gamma1 = -8.0 / 9.0 * a[1][2] * M;
    return detail::finish(e, an);
}

/// q1 = -(2 lambda x + mu x^2) times omega = g dx - f dy, integrated over the oval.
inline double m2_via_francoise(const PerturbationCoeffs& p, const OvalSpec& spec, double tol = kDefaultTolerance) {
    if (auto v = m1_violation(p)) throw PreconditionError("first-order envelope does not vanish: need " + *v);
    double L = p.lambda(), M = p.mu();
    auto F = [&](double x, double y, double dx, double dy) {
        double q1 = -(2.0 * L * x + M * x * x);
        return q1 * (p.g(x, y) * dx - p.f(x, y) * dy);
    };
    return cycle_integral_fn(F, spec, tol).value;
}

/// Vanishing cases of the second-order envelope, labelled as in the classification of Q1.
enum class Prop2Case { None, A, B, C, D, E };

inline char to_char(Prop2Case c) {
    switch (c) {
        case Prop2Case::A: return 'a';
        case Prop2Case::B: return 'b';
        case Prop2Case::C: return 'c';
        case Prop2Case::D: return 'd';
        case Prop2Case::E: return 'e';
        default: return '-';
    }
}

/// Determines which structural case the coefficients fall in (assuming the first-order envelope vanishes).
inline Prop2Case prop2_case(const PerturbationCoeffs& p) {
    const auto& a = p.a;
    double tol = kVanishTol * detail::coeff_scale(p);
    auto z = [&](double v) { return std::abs(v) <= tol; };
    double L = p.lambda(), M = p.mu();
    if (z(a[0][0]) && z(a[1][0]) && z(a[2][0]) && z(a[3][0]) && z(a[0][2]) && z(a[1][2])) return Prop2Case::E;
    bool rest02 = z(a[0][2]) && z(a[1][2]);
    if (z(L) && z(a[2][0] + a[0][0]) && z(a[1][0]) && z(a[3][0]) && rest02) return Prop2Case::A;
    if (z(M) && z(a[3][0] + a[1][0]) && z(a[0][0]) && z(a[2][0]) && rest02) return Prop2Case::B;
    if (z(M - L) && z(a[2][0] + a[1][0]) && z(a[0][0]) && z(a[3][0]) && rest02) return Prop2Case::C;
    if (z(M + L) && z(a[2][0] - a[1][0]) && z(a[0][0]) && z(a[3][0]) && rest02) return Prop2Case::D;
    return Prop2Case::None;
}

/// m = 2 a00 mu in case (a), 2 a10 lambda in cases (b)-(d), zero otherwise.
inline double stratum_m(const PerturbationCoeffs& p, Prop2Case c) {
    if (c == Prop2Case::A) return 2.0 * p.a[0][0] * p.mu();
    if (c == Prop2Case::B || c == Prop2Case::C || c == Prop2Case::D) return 2.0 * p.a[1][0] * p.lambda();
    return 0.0;
}

namespace detail {

inline std::pair<Prop2Case, double> require_order3(const PerturbationCoeffs& p) {
    if (auto v = m1_violation(p)) throw PreconditionError("first-order envelope does not vanish: need " + *v);
    Prop2Case c = prop2_case(p);
    if (c == Prop2Case::None) throw PreconditionError("second-order envelope does not vanish (no vanishing case applies)");
    if (c == Prop2Case::E) throw PreconditionError("case (e): the system is reversible in y, higher envelopes vanish");
    double m = stratum_m(p, c);
    if (std::abs(m) <= kVanishTol * coeff_scale(p))
        throw PreconditionError("m = 0: classify the stratum instead (Hamiltonian or reversible)");
    return {c, m};
}

}  // namespace detail

inline Envelope m3_envelope(const PerturbationCoeffs& p, Annulus an = Annulus::Right) {
    auto [c, m] = detail::require_order3(p);
    (void)c;
    const auto& a = p.a;
    const auto& b = p.b;
    double L = p.lambda(), M = p.mu();
    Envelope e;
    e.order = 3;
    e.alpha0 = m * b[0][0];
    e.alpha1 = m * (4.0 / 7.0 * L - 6.0 / 7.0 * a[1][1]);
    e.beta0 = m * (b[1][0] + b[3][0] + M / 8.0 - 3.0 / 8.0 * a[2][1]);
    e.beta1 = m * (0.5 * M - 1.5 * a[2][1]);
    e.gamma0 = m * (b[2][0] + L / 7.0 - 3.0 / 14.0 * a[1][1]);
    return detail::finish(e, an);
}

/// Names the first failing condition for the third-order envelope to vanish, if any.
inline std::optional<std::string> m3_violation(const PerturbationCoeffs& p) {
    const auto& a = p.a;
    const auto& b = p.b;
    double tol = kVanishTol * detail::coeff_scale(p);
    if (std::abs(b[0][0]) > tol) return "b00 = 0";
    if (std::abs(b[2][0]) > tol) return "b20 = 0";
    if (std::abs(b[1][0] + b[3][0]) > tol) return "b10 + b30 = 0";
    if (std::abs(2.0 * p.lambda() - 3.0 * a[1][1]) > tol) return "2 lambda - 3 a11 = 0";
    if (std::abs(p.mu() - 3.0 * a[2][1]) > tol) return "mu - 3 a21 = 0";
    return std::nullopt;
}

inline Envelope m4_envelope(const PerturbationCoeffs& p, Annulus an = Annulus::Right) {
    auto [c, m] = detail::require_order3(p);
    if (auto v = m3_violation(p)) throw PreconditionError("third-order envelope does not vanish: need " + *v);
    double L = p.lambda();
    double K = 6.0 * p.a[1][0] * p.a[1][0] * p.a[1][0] * L;
    Envelope e;
    e.order = 4;
    switch (c) {
        case Prop2Case::A: break;  // lambda = 0
        case Prop2Case::B:         // K (1/4 + h) I1
            e.beta0 = K / 4.0;
            e.beta1 = K;
            break;
        case Prop2Case::C:  // K (I1 - I2)
            e.beta0 = K;
            e.gamma0 = -K;
            break;
        case Prop2Case::D:  // K (I1 + I2)
            e.beta0 = K;
            e.gamma0 = K;
            break;
        default: break;
    }
    (void)m;
    return detail::finish(e, an);
}

enum class Stratum { NotVanishing, Hamiltonian, ReversibleY, ReversibleX };

inline const char* to_string(Stratum s) {
    switch (s) {
        case Stratum::NotVanishing: return "not-vanishing";
        case Stratum::Hamiltonian: return "hamiltonian";
        case Stratum::ReversibleY: return "reversible-y";
        case Stratum::ReversibleX: return "reversible-x";
    }
    return "?";
}

struct VanishingStratum {
    Stratum stratum = Stratum::NotVanishing;
    Prop2Case case_tag = Prop2Case::None;
    double m = 0.0;
    /// Order of the first envelope that does not vanish; 0 when none was found up to the requested order.
    int first_nonvanishing = 0;
    /// Highest order checked and found to vanish.
    int vanishes_through = 0;
    /// True when the requested order was too low to decide the stratum.
    bool undetermined = false;
    std::string note;
};

inline VanishingStratum classify_stratum(const PerturbationCoeffs& p, int through_order = 4) {
    if (through_order < 1 || through_order > 4) throw std::invalid_argument("classify_stratum: through_order must be 1..4");
    VanishingStratum r;
    double tol = kVanishTol * detail::coeff_scale(p);
    if (auto v = m1_violation(p)) {
        r.first_nonvanishing = 1;
        r.note = "fails " + *v;
        return r;
    }
    r.vanishes_through = 1;
    auto stop = [&](int next) {
        r.undetermined = true;
        r.note = "vanishes through order " + std::to_string(next - 1);
        return r;
    };
    if (through_order < 2) return stop(2);
    if (std::abs(p.lambda()) <= tol && std::abs(p.mu()) <= tol) {
        r.stratum = Stratum::Hamiltonian;
        r.vanishes_through = through_order;
        r.note = "lambda = mu = 0";
        return r;
    }
    Prop2Case c = prop2_case(p);
    r.case_tag = c;
    if (c == Prop2Case::E) {
        r.stratum = Stratum::ReversibleY;
        r.vanishes_through = through_order;
        r.note = "Q1 = 0";
        return r;
    }
    if (c == Prop2Case::None) {
        r.first_nonvanishing = 2;
        r.note = "no vanishing case of the second-order envelope applies";
        return r;
    }
    r.vanishes_through = 2;
    r.m = stratum_m(p, c);
    if (through_order < 3) return stop(3);
    if (auto v = m3_violation(p)) {
        r.first_nonvanishing = 3;
        r.note = "fails " + *v;
        return r;
    }
    r.vanishes_through = 3;
    if (through_order < 4) return stop(4);
    if (c == Prop2Case::A) {
        r.vanishes_through = 4;
        if (std::abs(p.a[2][1]) <= tol) {
            r.stratum = Stratum::Hamiltonian;
            r.note = "lambda = 0 and a21 = 0";
        } else {
            r.stratum = Stratum::ReversibleX;
            r.note = "lambda = 0";
        }
        return r;
    }
    r.first_nonvanishing = 4;
    r.note = "6 a10^3 lambda != 0";
    return r;
}

// ---------------------------------------------------------------------------------------------
// Darboux first integral of the reversible-in-x stratum.

enum class DarbouxVariant { General, A03Zero_PosA21, A03Zero_NegA21, NegativeDelta };

inline const char* to_string(DarbouxVariant v) {
    switch (v) {
        case DarbouxVariant::General: return "general";
        case DarbouxVariant::A03Zero_PosA21: return "a03-zero-positive-a21";
        case DarbouxVariant::A03Zero_NegA21: return "a03-zero-negative-a21";
        case DarbouxVariant::NegativeDelta: return "negative-delta";
    }
    return "?";
}

/// H = F1^n1 F2^n2 with F_i = x^2 + A_i y^2 + B_i y + C_i (up to the sign and inversion conventions of each variant).
struct DarbouxIntegral {
    using C = std::complex<double>;
    C A1, A2, B1, B2, C1, C2, n1, n2;
    DarbouxVariant variant = DarbouxVariant::General;

    C F1(double x, double y) const { return x * x + A1 * y * y + B1 * y + C1; }
    C F2(double x, double y) const { return x * x + A2 * y * y + B2 * y + C2; }

    /// Gradient of log|H|: n1 grad F1 / F1 + n2 grad F2 / F2. For conjugate factors the imaginary parts cancel.
    std::array<double, 2> log_gradient(double x, double y) const {
        C f1 = F1(x, y), f2 = F2(x, y);
        C gx = n1 * (2.0 * x) / f1 + n2 * (2.0 * x) / f2;
        C gy = n1 * (2.0 * A1 * y + B1) / f1 + n2 * (2.0 * A2 * y + B2) / f2;
        return {gx.real(), gy.real()};
    }

    /// Real value of the first integral.
    double value(double x, double y) const {
        C f1 = F1(x, y), f2 = F2(x, y);
        switch (variant) {
            case DarbouxVariant::NegativeDelta:
                return std::exp((n1 * std::log(f1) + n2 * std::log(f2)).real());
            case DarbouxVariant::A03Zero_PosA21:
                return std::pow(f1.real(), n1.real()) * std::pow(f2.real(), n2.real());
            case DarbouxVariant::A03Zero_NegA21:
                return std::pow(-f1.real(), n1.real()) * std::pow(-f2.real(), n2.real());
            case DarbouxVariant::General:
                return std::pow(std::abs(f1.real()), -n1.real()) * std::pow(std::abs(f2.real()), -n2.real());
        }
        return 0.0;
    }
};

inline DarbouxIntegral darboux_parameters(const PerturbationCoeffs& p, double eps) {
    if (eps == 0.0) throw std::invalid_argument("darboux_parameters: eps must be nonzero");
    VanishingStratum st = classify_stratum(p, 4);
    if (st.stratum != Stratum::ReversibleX) throw PreconditionError("darboux_parameters needs a system reversible in x");
    using C = std::complex<double>;
    const double a00 = p.a[0][0], a01 = p.a[0][1], a21 = p.a[2][1], a03 = p.a[0][3], b10 = p.b[1][0];
    const double den = 1.0 + eps * b10;
    DarbouxIntegral d;
    d.B1 = d.B2 = -2.0 * eps * a00 / den;
    if (a03 == 0.0) {
        d.variant = a21 > 0 ? DarbouxVariant::A03Zero_PosA21 : DarbouxVariant::A03Zero_NegA21;
        d.n1 = den;
        d.n2 = -0.5 * den;
        d.A1 = 0.0;
        d.A2 = -eps * a21 / den;
        double c1 = (1.0 + eps * a01) / (eps * a21) - 2.0 * eps * a00 * a00 / (a21 * den);
        d.C1 = c1;
        d.C2 = 0.5 * (c1 - 1.0);
        return d;
    }
    double Delta = a21 * a21 - 4.0 * a03 * (b10 + 1.0 / eps);
    if (Delta == 0.0) throw std::domain_error("darboux_parameters: Delta = 0");
    C sq = Delta > 0 ? C(std::sqrt(Delta), 0.0) : C(0.0, std::sqrt(-Delta));
    d.variant = Delta > 0 ? DarbouxVariant::General : DarbouxVariant::NegativeDelta;
    d.A1 = eps * (-a21 + sq) / (2.0 * den);
    d.A2 = eps * (-a21 - sq) / (2.0 * den);
    if (std::abs(d.A1 - d.A2) == 0.0) throw std::domain_error("darboux_parameters: A1 = A2");
    d.n1 = (1.0 + 3.0 * a21 / sq) * den / 4.0;
    d.n2 = (1.0 - 3.0 * a21 / sq) * den / 4.0;
    C nsum = d.n1 + d.n2;
    d.C1 = (1.0 + eps * a01 + nsum * (2.0 * d.A1 - d.B1 * d.B1)) / (2.0 * d.n2 * (d.A2 - d.A1));
    d.C2 = (1.0 + eps * a01 + nsum * (2.0 * d.A2 - d.B2 * d.B2)) / (2.0 * d.n1 * (d.A1 - d.A2));
    return d;
}

/// Perturbation in the reduced reversible-in-x form with free a00, a01, a21, a03, b10.
inline PerturbationCoeffs reversible_x_system(double a00, double a01, double a21, double a03, double b10) {
    PerturbationCoeffs p;
    p.a[0][0] = a00;
    p.a[2][0] = -a00;
    p.a[0][1] = a01;
    p.a[2][1] = a21;
    p.a[0][3] = a03;
    p.b[1][0] = b10;
    p.b[3][0] = -b10;
    p.b[1][1] = 2.0 * a00;
    p.b[1][2] = 2.0 * a21;
    return p;
}

// ---------------------------------------------------------------------------------------------
// Small-amplitude expansion at the center.

/// m_1..m_n with M2(s - 1/4) = kC1 sum m_k s^k; index 0 of the result is unused (zero).
inline std::vector<Rational> small_amplitude_coeffs(const RationalEnvelope& e, int n) {
    if (n < 1 || n > 32) throw std::invalid_argument("small_amplitude_coeffs: n must be 1..32");
    CenterCoefficients cc = center_coefficients(n);
    Rational quarter = rat(1, 4);
    Rational a0b = e.alpha0 - quarter * e.alpha1;
    Rational b0b = e.beta0 - quarter * e.beta1;
    Rational g0b = e.gamma0 - quarter * e.gamma1;
    std::vector<Rational> m(n + 1, Rational(0));
    for (int k = 1; k <= n; ++k) {
        m[k] = a0b * cc.a[k] + e.alpha1 * cc.a[k - 1] + g0b * cc.c[k] + e.gamma1 * cc.c[k - 1];
        if (k == 1) m[k] += b0b;
        if (k == 2) m[k] += e.beta1;
    }
    return m;
}

/// Double-precision m_k, for envelopes given in floating point.
inline std::vector<double> small_amplitude_coeffs(const Envelope& e, int n) {
    if (n < 1 || n > kMaxCenterTerms) throw std::invalid_argument("small_amplitude_coeffs: n out of range");
    const auto& cd = center_coefficients_double();
    double a0b = e.alpha0 - 0.25 * e.alpha1, b0b = e.beta0 - 0.25 * e.beta1, g0b = e.gamma0 - 0.25 * e.gamma1;
    std::vector<double> m(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        m[k] = a0b * cd[0][k] + e.alpha1 * cd[0][k - 1] + g0b * cd[1][k] + e.gamma1 * cd[1][k - 1];
        if (k == 1) m[k] += b0b;
        if (k == 2) m[k] += e.beta1;
    }
    return m;
}

enum class Theorem4Target { FiveZero, ThreeThree, FourOne };

inline const char* to_string(Theorem4Target t) {
    switch (t) {
        case Theorem4Target::FiveZero: return "5+0";
        case Theorem4Target::ThreeThree: return "3+3";
        case Theorem4Target::FourOne: return "4+1";
    }
    return "?";
}

struct Theorem4Construction {
    Theorem4Target target;
    /// Base envelope with gamma1 = 1 and m_1 = ... = m_n = 0 for the n free equations.
    RationalEnvelope base;
    /// Barred coefficients (value at s = 0) of the base.
    Rational alpha0_bar, beta0_bar, gamma0_bar;
    /// Number of equations m_1..m_n imposed, i.e. the number of small zeros a ladder can create.
    int n_conditions = 0;
    /// First nonzero coefficient of the base expansion, m_{n+1}.
    Rational leading;
    int expected_right = 0, expected_left = 0;
};

namespace detail {

/// Unknown slots of the small-amplitude system, in the order (alpha0_bar, alpha1, beta0_bar, beta1, gamma0_bar).
inline std::vector<int> theorem4_unknowns(Theorem4Target t) {
    switch (t) {
        case Theorem4Target::FiveZero: return {0, 1, 2, 3, 4};
        case Theorem4Target::ThreeThree: return {0, 1, 4};
        case Theorem4Target::FourOne: return {0, 1, 3, 4};
    }
    return {};
}

/// Solves m_k = delta_k (k = 1..n) with gamma1 = 1 for the free barred coefficients.
inline RationalEnvelope theorem4_solve(Theorem4Target t, const std::vector<Rational>& delta) {
    std::vector<int> unk = theorem4_unknowns(t);
    const int n = static_cast<int>(unk.size());
    if (static_cast<int>(delta.size()) != n) throw std::invalid_argument("theorem4: wrong number of ladder values");
    CenterCoefficients cc = center_coefficients(n + 2);
    // m_k = abar a_k + alpha1 a_{k-1} + bbar [k=1] + beta1 [k=2] + gbar c_k + gamma1 c_{k-1}
    std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n));
    std::vector<Rational> rhs(n);
    for (int k = 1; k <= n; ++k) {
        std::array<Rational, 5> row = {cc.a[k], cc.a[k - 1], Rational(k == 1 ? 1 : 0), Rational(k == 2 ? 1 : 0), cc.c[k]};
        for (int j = 0; j < n; ++j) A[k - 1][j] = row[unk[j]];
        rhs[k - 1] = delta[k - 1] - cc.c[k - 1];
    }
    std::vector<Rational> sol = solve_linear(A, rhs);
    std::array<Rational, 5> slot{};
    for (int j = 0; j < n; ++j) slot[unk[j]] = sol[j];
    RationalEnvelope e;
    e.gamma1 = 1;
    e.alpha1 = slot[1];
    e.beta1 = slot[3];
    e.alpha0 = slot[0] + rat(1, 4) * e.alpha1;
    e.beta0 = slot[2] + rat(1, 4) * e.beta1;
    e.gamma0 = slot[4] + rat(1, 4) * e.gamma1;
    return e;
}

}  // namespace detail

inline Theorem4Construction theorem4_construction(Theorem4Target t) {
    Theorem4Construction c;
    c.target = t;
    int n = static_cast<int>(detail::theorem4_unknowns(t).size());
    c.n_conditions = n;
    c.base = detail::theorem4_solve(t, std::vector<Rational>(n, Rational(0)));
    c.alpha0_bar = c.base.alpha0 - rat(1, 4) * c.base.alpha1;
    c.beta0_bar = c.base.beta0 - rat(1, 4) * c.base.beta1;
    c.gamma0_bar = c.base.gamma0 - rat(1, 4) * c.base.gamma1;
    c.leading = small_amplitude_coeffs(c.base, n + 1)[n + 1];
    switch (t) {
        case Theorem4Target::FiveZero: c.expected_right = 5, c.expected_left = 0; break;
        case Theorem4Target::ThreeThree: c.expected_right = 3, c.expected_left = 3; break;
        case Theorem4Target::FourOne: c.expected_right = 4, c.expected_left = 1; break;
    }
    return c;
}

/// Values of the small-amplitude basis at s: the functions multiplying
/// (alpha0_bar, alpha1, beta0_bar, beta1, gamma0_bar, gamma1) in M2, divided by I1 = kC1 s.
inline std::array<double, 6> small_amplitude_basis(double s) {
    double h = s - 0.25;
    double I0, I2;
    if (s <= kCenterSeriesLimit) {
        const auto& cd = center_coefficients_double();
        I0 = center_series_derivs(cd[0], s, 0, 1)[0] / kC1;
        I2 = center_series_derivs(cd[1], s, 0, 1)[0] / kC1;
    } else {
        auto I = basis_integrals(h);
        I0 = I[0] / (kC1 * s);
        I2 = I[2] / (kC1 * s);
    }
    return {I0, s * I0, 1.0, s, I2, s * I2};
}

/// Ladder construction: perturbs the free coefficients of the base (gamma1 = 1 kept) so that M2
/// vanishes exactly at s = rho_i, one level per condition. The resulting expansion
/// delta_1 s + ... + delta_n s^n + (higher terms) has delta_1 < 0 and alternating signs when the
/// rho_i are small, positive and distinct. The double solution is returned as an exact rational.
inline RationalEnvelope theorem4_ladder(const Theorem4Construction& c, const std::vector<double>& rho) {
    std::vector<int> unk = detail::theorem4_unknowns(c.target);
    const int n = static_cast<int>(unk.size());
    if (static_cast<int>(rho.size()) != n) throw std::invalid_argument("theorem4_ladder: need one level per condition");
    std::vector<std::vector<double>> A(n, std::vector<double>(n));
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
        if (!(rho[i] > 0.0 && rho[i] < 0.25)) throw std::invalid_argument("theorem4_ladder: levels must lie in (0, 1/4)");
        auto basis = small_amplitude_basis(rho[i]);
        for (int j = 0; j < n; ++j) A[i][j] = basis[unk[j]];
        rhs[i] = -basis[5];
    }
    std::vector<double> sol = solve_linear(A, rhs);
    std::array<Rational, 5> slot{};
    for (int j = 0; j < n; ++j) slot[unk[j]] = Rational(sol[j]);
    RationalEnvelope e;
    e.gamma1 = 1;
    e.alpha1 = slot[1];
    e.beta1 = slot[3];
    e.alpha0 = slot[0] + rat(1, 4) * e.alpha1;
    e.beta0 = slot[2] + rat(1, 4) * e.beta1;
    e.gamma0 = slot[4] + rat(1, 4) * e.gamma1;
    return e;
}

/// The ladder delta_1..delta_n of an envelope: its first n small-amplitude coefficients.
inline std::vector<Rational> ladder_deltas(const RationalEnvelope& e, int n) {
    auto m = small_amplitude_coeffs(e, n);
    return {m.begin() + 1, m.end()};
}

/// Default ladder levels, spread over the small-amplitude region.
inline std::vector<double> default_ladder_levels(Theorem4Target t) {
    switch (t) {
        case Theorem4Target::FiveZero: return {0.02, 0.05, 0.08, 0.11, 0.14};
        case Theorem4Target::ThreeThree: return {0.03, 0.07, 0.11};
        case Theorem4Target::FourOne: return {0.04, 0.08, 0.12, 0.16};
    }
    return {};
}

/// Perturbation coefficients realizing a given second-order envelope with M1 = 0, for fixed lambda, mu
/// with lambda mu (lambda^2 - mu^2) != 0 (the system for a00..a12 is then invertible).
inline PerturbationCoeffs perturbation_for_envelope(const Envelope& e, double lambda = 1.0, double mu = 2.0) {
    const double L = lambda, M = mu;
    // unknowns: a00, a10, a20, a30, a02, a12
    std::vector<std::vector<double>> A = {
        {-2 * L, 0, 0, 0, 0, 0},
        {0, 0, 0, -8.0 / 7 * M, -8.0 / 7 * L, -8.0 / 63 * M},
        {-2 * M, -2 * L, -2 * M, -2 * L, -M / 4, -L / 4},
        {0, 0, 0, 0, -M, -L},
        {0, -2 * M, -2 * L, -16.0 / 7 * M, -2.0 / 7 * L, -16.0 / 63 * M},
        {0, 0, 0, 0, 0, -8.0 / 9 * M},
    };
    Envelope r = e.annulus == Annulus::Left ? e.mirrored() : e;
    std::vector<double> rhs = {r.alpha0, r.alpha1, r.beta0, r.beta1, r.gamma0, r.gamma1};
    std::vector<double> x = solve_linear(A, rhs);
    // a30 and b03 keep 50 significant bits so that 3 a30 and 3 b03 are exact and the first-order
    // conditions hold exactly in floating point.
    auto trim = [](double v) {
        int ex;
        double m = std::frexp(v, &ex);
        return std::ldexp(std::round(std::ldexp(m, 50)), ex - 50);
    };
    x[3] = trim(x[3]);
    const double b03 = trim(-x[5] / 3.0);
    x[5] = -3.0 * b03;
    PerturbationCoeffs p;
    p.a[0][0] = x[0];
    p.a[1][0] = x[1];
    p.a[2][0] = x[2];
    p.a[3][0] = x[3];
    p.a[0][2] = x[4];
    p.a[1][2] = x[5];
    p.b[0][2] = L;
    p.b[1][2] = M;
    p.b[0][1] = -x[1];
    p.b[0][3] = b03;
    p.b[1][1] = -2.0 * x[2];
    p.b[2][1] = -3.0 * x[3];
    return p;
}

}  // namespace eightloop
