#pragma once

#include "eightloop/hamiltonian.hpp"
#include "eightloop/melnikov.hpp"

#include <boost/multiprecision/float128.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// odeint walks the value_type chain to find the scalar type; float128's value_type is itself.
namespace boost::numeric::odeint::detail {
template <>
struct extract_value_type<boost::multiprecision::float128, void> {
    using type = boost::multiprecision::float128;
};
}  // namespace boost::numeric::odeint::detail

namespace eightloop {

using Float128 = boost::multiprecision::float128;

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kBlowUpRadius = 10.0;

struct TrajectorySample {
    double t, x, y;
};

/// Integrates the perturbed system and returns samples at n_samples + 1 equally spaced times in [0, t_end].
inline std::vector<TrajectorySample> integrate_orbit(double x0, double y0, const PerturbationCoeffs& p, double eps,
                                                     double t_end, int n_samples = 100, double tol = 1e-13) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(eps) || !(t_end >= 0.0) || n_samples < 1)
        throw std::invalid_argument("integrate_orbit: invalid arguments");
    auto rhs = [&](const State& s, State& d, double) {
        auto [fx, fy] = vector_field(s[0], s[1], p, eps);
        d[0] = fx;
        d[1] = fy;
    };
    std::vector<double> times;
    for (int i = 0; i <= n_samples; ++i) times.push_back(t_end * i / n_samples);
    std::vector<TrajectorySample> out;
    State s{x0, y0};
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    auto obs = [&](const State& st, double t) {
        if (std::hypot(st[0], st[1]) > kBlowUpRadius) throw SimulationError("orbit left the disc of radius 10");
        out.push_back({t, st[0], st[1]});
    };
    odeint::integrate_times(stepper, rhs, s, times.begin(), times.end(), std::min(1e-2, t_end / n_samples + 1e-300), obs);
    return out;
}

struct DisplacementSample {
    double h = 0.0, eps = 0.0;
    /// H at the first return to the section minus H at the start.
    double d = 0.0;
    double return_time = 0.0;
};

struct DisplacementOptions {
    double tol = 1e-13;      // relative/absolute local tolerance of the stepper
    double t_max = 200.0;    // give up if no return before this time
};

namespace detail {

/// Right-hand side of the augmented system (x, y, w) with w' = (H_x f + H_y g) / scale.
template <class Real>
struct AugmentedField {
    const PerturbationCoeffs& p;
    Real eps;
    Real inv_scale;

    void operator()(const std::array<Real, 3>& s, std::array<Real, 3>& d, Real) const {
        const Real& x = s[0];
        const Real& y = s[1];
        Real f = p.f(x, y), g = p.g(x, y);
        Real hx = x * x * x - x;
        d[0] = y + eps * f;
        d[1] = -hx + eps * g;
        d[2] = (hx * f + y * g) * inv_scale;
    }
};

}  // namespace detail

/// Poincare displacement on the x-axis section through the outer turning point of the oval at level h.
/// The energy change is accumulated along the orbit (dH/dt = eps (H_x f + H_y g)), so d keeps
/// relative accuracy even when it is far below the size of the coordinates.
template <class Real = double>
DisplacementSample displacement_map(double h, const PerturbationCoeffs& p, double eps, Annulus an,
                                    const DisplacementOptions& opt = {}) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<Real, 3>;
    using std::abs;
    using std::sqrt;
    if (!(h > -0.25 && h < 0.0)) throw DomainError("displacement_map: h must lie in (-1/4, 0)");
    double scale = detail::coeff_scale(p);
    DisplacementSample out{h, eps, 0.0, 0.0};
    if (eps == 0.0) return out;
    detail::AugmentedField<Real> field{p, Real(eps), Real(1) / Real(scale)};
    // outer turning point, computed in the working precision
    Real hr = Real(h);
    Real xh = sqrt(Real(1) + sqrt(Real(1) + 4 * hr));
    const Real sgn = an == Annulus::Right ? Real(1) : Real(-1);
    State s{sgn * xh, Real(0), Real(0)};
    Real t = 0;
    Real dt = Real(1e-3);
    auto stepper = odeint::make_controlled(Real(opt.tol), Real(opt.tol), odeint::runge_kutta_fehlberg78<State, Real, State, Real>());
    // Right: the flow leaves downwards and returns from above; Left is the mirror image.
    bool left_half = false;  // has the orbit visited the half-plane opposite to the return side?
    for (int guard = 0; guard < 5000000; ++guard) {
        State prev = s;
        Real tprev = t;
        odeint::controlled_step_result res = stepper.try_step(field, s, t, dt);
        if (res == odeint::fail) continue;
        if (abs(s[0]) > Real(kBlowUpRadius) || abs(s[1]) > Real(kBlowUpRadius)) throw SimulationError("orbit escaped");
        if (t > Real(opt.t_max)) throw SimulationError("no return to the section");
        Real ys = sgn * s[1], yp = sgn * prev[1];
        if (ys < 0) left_half = true;
        if (left_half && yp > 0 && ys <= 0 && sgn * s[0] > 0) {
            // Henon's trick: integrate from the last state to y = 0 with y as the independent variable.
            auto hen = [&](const State& z, State& dz, Real yv) {
                State full{z[0], yv, z[2]};
                State df;
                field(full, df, Real(0));
                Real inv = Real(1) / df[1];
                dz[0] = df[0] * inv;
                dz[1] = inv;  // dt/dy
                dz[2] = df[2] * inv;
            };
            State z{prev[0], Real(0), prev[2]};
            Real yv = prev[1];
            const int sub = 4;
            Real dy = (Real(0) - prev[1]) / sub;
            odeint::runge_kutta_fehlberg78<State, Real, State, Real> rk;
            for (int i = 0; i < sub; ++i) {
                rk.do_step(hen, z, yv, dy);
                yv += dy;
            }
            out.d = static_cast<double>(Real(eps) * Real(scale) * z[2]);
            out.return_time = static_cast<double>(tprev + z[1]);
            return out;
        }
    }
    throw SimulationError("step limit exceeded");
}

/// Richardson extrapolation of d(h, eps) / eps^order over eps0, eps0/2, eps0/4, eps0/8.
struct MelnikovEstimate {
    double value = 0.0;
    double error = 0.0;
};

template <class Real = Float128>
MelnikovEstimate extract_melnikov(double h, const PerturbationCoeffs& p, int order, Annulus an, double eps0 = 1e-2,
                                  int depth = 4, double tol = 1e-24) {
    if (order < 1 || order > 3) throw std::invalid_argument("extract_melnikov: order must be 1..3");
    if (order >= 2)
        if (auto v = m1_violation(p)) throw PreconditionError("first-order envelope does not vanish: need " + *v);
    if (order >= 3) {
        Prop2Case c = prop2_case(p);
        bool ham = std::abs(p.lambda()) + std::abs(p.mu()) <= kVanishTol * detail::coeff_scale(p);
        if (c == Prop2Case::None && !ham) throw PreconditionError("second-order envelope does not vanish");
    }
    std::vector<std::vector<double>> R(depth, std::vector<double>(depth));
    double eps = eps0;
    for (int i = 0; i < depth; ++i, eps *= 0.5) {
        double d = displacement_map<Real>(h, p, eps, an, {tol, 200.0}).d;
        R[i][0] = d / std::pow(eps, order);
        for (int j = 1; j <= i; ++j) {
            double f = std::pow(2.0, j);
            R[i][j] = (f * R[i][j - 1] - R[i - 1][j - 1]) / (f - 1.0);
        }
    }
    MelnikovEstimate est{R[depth - 1][depth - 1], std::abs(R[depth - 1][depth - 1] - R[depth - 1][depth - 2])};
    if (!std::isfinite(est.value)) throw SimulationError("extrapolation did not converge");
    return est;
}

enum class Stability { Stable, Unstable, Semistable };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Semistable: return "semistable";
    }
    return "?";
}

struct LimitCycleFinding {
    double h_star = 0.0;
    Annulus annulus = Annulus::Right;
    double eps = 0.0;
    Stability stability = Stability::Stable;
    double residual = 0.0;
};

struct CycleSearchOptions {
    int grid = 120;
    double s_min = 1e-6;
    double s_max = 0.25 - 1e-3;
    /// Energy resolution of the polished cycle.
    double h_tol = 1e-12;
    DisplacementOptions disp{};
};

/// Scans the annulus for sign changes of the displacement and polishes each by bisection.
template <class Real = double>
std::vector<LimitCycleFinding> find_limit_cycles(const PerturbationCoeffs& p, double eps, Annulus an,
                                                 const CycleSearchOptions& opt = {}) {
    auto logit = [](double q) { return std::log(q / (1.0 - q)); };
    double u0 = logit(4.0 * opt.s_min), u1 = logit(4.0 * opt.s_max);
    auto d = [&](double h) { return displacement_map<Real>(h, p, eps, an, opt.disp).d; };
    std::vector<double> hs, ds;
    for (int i = 0; i < opt.grid; ++i) {
        double u = u0 + (u1 - u0) * i / (opt.grid - 1);
        double h = 0.25 / (1.0 + std::exp(-u)) - 0.25;
        double v;
        try {
            v = d(h);
        } catch (const SimulationError&) {
            break;  // orbits beyond this level no longer return
        }
        hs.push_back(h);
        ds.push_back(v);
    }
    std::vector<LimitCycleFinding> out;
    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
        if (ds[i] == 0.0 || (ds[i] > 0) == (ds[i + 1] > 0)) continue;
        // Illinois variant of regula falsi
        double a = hs[i], b = hs[i + 1], fa = ds[i], fb = ds[i + 1];
        int side = 0;
        double m = a, prev = b, fm = fa;
        for (int it = 0; it < 100 && b - a > opt.h_tol && std::abs(m - prev) > opt.h_tol; ++it) {
            prev = m;
            m = (a * fb - b * fa) / (fb - fa);
            if (!(m > a && m < b)) m = 0.5 * (a + b);
            fm = d(m);
            if (fm == 0.0) {
                a = b = m;
                break;
            }
            if ((fm > 0) == (fa > 0)) {
                if (side == -1) fb *= 0.5;
                a = m;
                fa = fm;
                side = -1;
            } else {
                if (side == 1) fa *= 0.5;
                b = m;
                fb = fm;
                side = 1;
            }
        }
        LimitCycleFinding c;
        c.h_star = a == b ? a : m;
        c.annulus = an;
        c.eps = eps;
        // d > 0 below the cycle and d < 0 above it: nearby orbits are pushed onto it.
        c.stability = ds[i] > 0 ? Stability::Stable : Stability::Unstable;
        c.residual = std::abs(fm);
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Darboux first-integral checks.

/// Max over the points of |grad log H . X| / (|grad log H| |X|).
inline double darboux_residual(const PerturbationCoeffs& p, double eps, const std::vector<std::array<double, 2>>& pts) {
    DarbouxIntegral D = darboux_parameters(p, eps);
    double worst = 0.0;
    for (const auto& q : pts) {
        auto f1 = D.F1(q[0], q[1]), f2 = D.F2(q[0], q[1]);
        if (std::abs(f1) < 1e-8 || std::abs(f2) < 1e-8) throw DomainError("sample point on a Darboux factor");
        auto g = D.log_gradient(q[0], q[1]);
        auto [fx, fy] = vector_field(q[0], q[1], p, eps);
        double num = std::abs(g[0] * fx + g[1] * fy);
        double den = std::hypot(g[0], g[1]) * std::hypot(fx, fy);
        if (den == 0.0) continue;
        worst = std::max(worst, num / den);
    }
    return worst;
}

/// The reversible-in-x example system (eps = 1) and its first integral (x^2 - y + 5)^2 / (x^2 - y^2 - y + 2).
inline PerturbationCoeffs darboux_example() { return reversible_x_system(1.0, 10.0, 2.0, 0.0, 1.0); }

inline double darboux_example_integral(double x, double y) {
    double u = x * x - y + 5.0;
    return u * u / (x * x - y * y - y + 2.0);
}

/// Loop level of the example through its saddle (0, -1/11), from its closed-form loop equation.
inline constexpr double kDarbouxExampleLoopLevel = 112.0 / 9.0;

struct SaddleCheck {
    double field_norm = 0.0;  // |X(0, -1/11)| for the example system
    double level_gap = 0.0;   // |H1(0, -1/11) - 112/9|
};

inline SaddleCheck darboux_example_saddle_check() {
    const double ys = -1.0 / 11.0;
    auto [fx, fy] = vector_field(0.0, ys, darboux_example(), 1.0);
    return {std::hypot(fx, fy), std::abs(darboux_example_integral(0.0, ys) - kDarbouxExampleLoopLevel)};
}

// ---------------------------------------------------------------------------------------------
// Simulated cycle counts for the small-amplitude constructions.

struct ConstructionCycles {
    Theorem4Target target;
    RationalEnvelope envelope;  // ladder envelope, right-annulus coefficients
    PerturbationCoeffs p;
    std::vector<LimitCycleFinding> right, left;
};

/// Realizes the ladder envelope of a construction as a perturbation and counts the cycles of the
/// system at eps on both annuli. The ladder values of M2 near the center are tiny, so the
/// perturbation is scaled by kappa = 2^kappa_exp: the eps^3 remainder then sits far below M2, and a
/// power of two keeps the first-order conditions exact.
inline ConstructionCycles simulate_construction(Theorem4Target t, double eps = 1e-3, int grid = 60,
                                                int kappa_exp = -37) {
    ConstructionCycles out{t, {}, {}, {}, {}};
    Theorem4Construction c = theorem4_construction(t);
    out.envelope = theorem4_ladder(c, default_ladder_levels(t));
    out.p = perturbation_for_envelope(out.envelope.to_double(2, Annulus::Right)).scaled(std::ldexp(1.0, kappa_exp));
    CycleSearchOptions opt;
    opt.grid = grid;
    opt.h_tol = 1e-9;
    opt.disp.tol = 1e-30;
    out.right = find_limit_cycles<Float128>(out.p, eps, Annulus::Right, opt);
    out.left = find_limit_cycles<Float128>(out.p, eps, Annulus::Left, opt);
    return out;
}

}  // namespace eightloop
