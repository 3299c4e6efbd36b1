#pragma once

#include "eightloop/center_series.hpp"
#include "eightloop/melnikov.hpp"
#include "eightloop/quadrature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace eightloop {

inline constexpr double kEndMargin = 1e-6;
inline constexpr double kRootResolution = 1e-7;

struct Zero {
    double h = 0.0;
    int multiplicity = 1;  // 3 stands for "3 or more"
    double residual = 0.0;
};

struct ZeroReport {
    std::vector<Zero> zeros;
    int count_with_multiplicity = 0;
    std::vector<std::string> notes;
};

struct ZeroOptions {
    double lo = -0.25 + kEndMargin;
    double hi = -kEndMargin;
    int grid = 600;
    /// Relative threshold (against |f| at the neighbouring grid points) below which a
    /// non-crossing local minimum of |f| counts as a double root.
    double touch_tol = 1e-9;
};

/// Scan grid in h: logistic in s = h + 1/4, dense near both ends of the interval.
inline std::vector<double> scan_grid(int n, double lo = -0.25 + kEndMargin, double hi = -kEndMargin) {
    auto logit = [](double p) { return std::log(p / (1.0 - p)); };
    double u0 = logit(4.0 * kEndMargin), u1 = logit(1.0 - 4.0 * kEndMargin);
    std::vector<double> g;
    g.push_back(lo);
    for (int i = 0; i < n; ++i) {
        double u = u0 + (u1 - u0) * i / (n - 1);
        double h = 0.25 / (1.0 + std::exp(-u)) - 0.25;
        if (h > lo && h < hi) g.push_back(h);
    }
    g.push_back(hi);
    return g;
}

namespace detail {

inline double bisect(const std::function<double(double)>& f, double a, double b, double fa) {
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)) && b - a > 4e-17; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Counts zeros of f on [opt.lo, opt.hi]: sign changes on a scan grid polished by bisection,
/// plus touching (even) zeros found as near-zero local minima of |f|.
inline ZeroReport count_zeros(const std::function<double(double)>& f, const ZeroOptions& opt = {},
                              const std::vector<double>* grid_in = nullptr, const std::vector<double>* values_in = nullptr) {
    std::vector<double> grid = grid_in ? *grid_in : scan_grid(opt.grid, opt.lo, opt.hi);
    std::vector<double> v;
    if (values_in) {
        v = *values_in;
    } else {
        v.reserve(grid.size());
        for (double h : grid) v.push_back(f(h));
    }
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    ZeroReport rep;
    if (scale == 0.0) {
        rep.notes.push_back("function vanishes on the whole grid");
        return rep;
    }
    // A crossing whose slope is tiny compared with the values at the bracket ends is odd of order >= 3.
    auto slope_mult = [&](double h, double w, double local) {
        double d = std::max(1e-3 * w, 1e-12);
        double fp = f(std::min(h + d, opt.hi)), fm = f(std::max(h - d, opt.lo));
        double slope = (fp - fm) / (2 * d);
        return std::abs(slope) * w < 1e-3 * local ? 3 : 1;
    };
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (v[i] == 0.0) {
            if (i > 0 && i + 1 < n && v[i - 1] != 0.0 && (v[i - 1] > 0) != (v[i + 1] > 0))
                rep.zeros.push_back({grid[i], 1, 0.0});
            continue;
        }
        if (v[i + 1] != 0.0 && (v[i] > 0) != (v[i + 1] > 0)) {
            double r = detail::bisect(f, grid[i], grid[i + 1], v[i]);
            rep.zeros.push_back({r, slope_mult(r, grid[i + 1] - grid[i], std::abs(v[i]) + std::abs(v[i + 1])), std::abs(f(r))});
        }
    }
    // touching zeros
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (v[i] == 0.0 || v[i - 1] == 0.0 || v[i + 1] == 0.0) continue;
        bool same = (v[i - 1] > 0) == (v[i] > 0) && (v[i] > 0) == (v[i + 1] > 0);
        if (!same || !(std::abs(v[i]) <= std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1]))) continue;
        auto g = [&](double h) { return std::abs(f(h)); };
        auto [hm, fmin] = boost::math::tools::brent_find_minima(g, grid[i - 1], grid[i + 1], 50);
        double local = std::max(std::abs(v[i - 1]), std::abs(v[i + 1]));
        if (fmin <= opt.touch_tol * local) {
            double w = grid[i + 1] - grid[i - 1];
            double d = std::max(1e-3 * w, 1e-10);
            double curv = (f(hm + d) - 2 * f(hm) + f(hm - d)) / (d * d);
            int mult = std::abs(curv) * w * w < 1e-3 * local ? 3 : 2;
            rep.zeros.push_back({hm, mult, fmin});
        }
    }
    std::sort(rep.zeros.begin(), rep.zeros.end(), [](const Zero& a, const Zero& b) { return a.h < b.h; });
    // merge clusters
    std::vector<Zero> merged;
    for (const Zero& z : rep.zeros) {
        if (!merged.empty() && z.h - merged.back().h < kRootResolution) {
            merged.back().multiplicity = std::min(3, merged.back().multiplicity + z.multiplicity);
            rep.notes.push_back("merged roots closer than resolution near h = " + std::to_string(z.h));
            continue;
        }
        merged.push_back(z);
    }
    rep.zeros = merged;
    for (const Zero& z : rep.zeros) rep.count_with_multiplicity += z.multiplicity;
    return rep;
}

/// An envelope as a function of h. Close to the center it is summed from its expansion
/// M2 = kC1 sum m_k s^k (coefficients exact when the envelope is given in rationals),
/// elsewhere from the basic integrals.
class EnvelopeFunction {
public:
    explicit EnvelopeFunction(const Envelope& e) : env_(e), m_(small_amplitude_coeffs(e, kMaxCenterTerms)) {}
    explicit EnvelopeFunction(const RationalEnvelope& e, Annulus an = Annulus::Right)
        : env_((an == Annulus::Left ? e.mirrored() : e).to_double(2, an)) {
        auto mr = small_amplitude_coeffs(an == Annulus::Left ? e.mirrored() : e, 32);
        m_ = small_amplitude_coeffs(env_, kMaxCenterTerms);
        for (int k = 1; k <= 32; ++k) m_[k] = to_double(mr[k]);
    }

    double operator()(double h) const {
        double s = h + 0.25;
        if (s <= kCenterSeriesLimit) {
            double acc = 0.0;
            for (int k = kMaxCenterTerms; k >= 1; --k) acc = acc * s + m_[k];
            return kC1 * acc * s;
        }
        return evaluate_envelope(env_, {h, Annulus::Right});
    }
    const Envelope& envelope() const { return env_; }

private:
    Envelope env_;
    std::vector<double> m_;
};

/// Basis integrals tabulated on the scan grid, for counting zeros of many envelopes.
struct BasisTable {
    std::vector<double> h;
    std::vector<std::array<double, 3>> I;

    explicit BasisTable(int n = 600) : h(scan_grid(n)) {
        I.reserve(h.size());
        for (double x : h) I.push_back(basis_integrals(x));
    }
    std::vector<double> values(const Envelope& e) const {
        std::vector<double> v(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) v[i] = e.evaluate(h[i], I[i]);
        return v;
    }
};

inline ZeroReport count_envelope_zeros(const Envelope& e, const BasisTable* table = nullptr) {
    EnvelopeFunction f(e);
    if (!table) return count_zeros(std::cref(f));
    std::vector<double> v = table->values(e);
    return count_zeros(std::cref(f), {}, &table->h, &v);
}

/// Zeros on one annulus of an envelope given exactly (right-annulus coefficients).
inline ZeroReport count_envelope_zeros(const RationalEnvelope& e, Annulus an) {
    EnvelopeFunction f(e, an);
    return count_zeros(std::cref(f));
}

struct Distribution {
    ZeroReport right, left;
    Envelope envelope;
};

inline Distribution distribution(const PerturbationCoeffs& p, const BasisTable* table = nullptr) {
    Envelope e = m2_envelope(p, Annulus::Right);
    return {count_envelope_zeros(e, table), count_envelope_zeros(e.mirrored(), table), e};
}

inline Distribution distribution(const Envelope& right_envelope, const BasisTable* table = nullptr) {
    return {count_envelope_zeros(right_envelope, table), count_envelope_zeros(right_envelope.mirrored(), table),
            right_envelope};
}

/// Random envelope with log-uniform magnitudes in [1e-3, 1e3] and random signs.
inline Envelope random_envelope(std::mt19937_64& rng, bool beta1_zero = false, bool beta_zero = false) {
    std::uniform_real_distribution<double> logm(-3.0, 3.0);
    std::bernoulli_distribution coin(0.5);
    auto draw = [&] { return (coin(rng) ? 1.0 : -1.0) * std::pow(10.0, logm(rng)); };
    Envelope e;
    e.alpha0 = draw();
    e.alpha1 = draw();
    e.beta0 = draw();
    e.beta1 = draw();
    e.gamma0 = draw();
    e.gamma1 = draw();
    if (beta1_zero || beta_zero) e.beta1 = 0.0;
    if (beta_zero) e.beta0 = 0.0;
    return e;
}

struct SearchResult {
    Envelope best;
    int right = 0, left = 0;
    bool reached = false;
    int evaluations = 0;
};

/// Randomized search for an envelope whose (right, left) zero counts reach a target.
/// Candidates are built by forcing zeros at chosen levels (a linear condition per zero) and
/// taking the remaining free direction; the chosen levels are then perturbed by a local search.
inline SearchResult search_distribution(int target_right, int target_left, int budget, std::uint64_t seed = 1,
                                        bool freeze_beta = false, const BasisTable* table = nullptr) {
    std::mt19937_64 rng(seed);
    BasisTable local_table(300);
    const BasisTable& tab = table ? *table : local_table;
    // free coefficients: (alpha0, alpha1, beta0, beta1, gamma0, gamma1) or without betas
    const std::vector<int> slots = freeze_beta ? std::vector<int>{0, 1, 4, 5} : std::vector<int>{0, 1, 2, 3, 4, 5};
    const int nfree = static_cast<int>(slots.size());
    const int nforce = nfree - 1;
    auto row_for = [&](double h, bool left) {
        auto I = basis_integrals(h);
        double sb = left ? -1.0 : 1.0;
        std::array<double, 6> full = {I[0], h * I[0], sb * I[1], sb * h * I[1], I[2], h * I[2]};
        std::vector<double> r;
        for (int s : slots) r.push_back(full[s]);
        return r;
    };
    auto build = [&](const std::vector<std::pair<double, bool>>& roots) -> std::optional<Envelope> {
        // null vector of the nforce x nfree system: fix the last free coefficient to 1
        std::vector<std::vector<double>> A;
        std::vector<double> rhs;
        for (auto [h, left] : roots) {
            auto r = row_for(h, left);
            rhs.push_back(-r.back());
            r.pop_back();
            A.push_back(r);
        }
        std::vector<double> x;
        try {
            x = solve_linear(A, rhs);
        } catch (...) {
            return std::nullopt;
        }
        x.push_back(1.0);
        std::array<double, 6> c{};
        for (int i = 0; i < nfree; ++i) c[slots[i]] = x[i];
        Envelope e{c[0], c[1], c[2], c[3], c[4], c[5], 2, Annulus::Right};
        return e;
    };
    auto score = [&](int r, int l) { return std::min(r, target_right) + std::min(l, target_left); };
    SearchResult best;
    int best_score = -1;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto random_level = [&] {
        double u = uni(rng);
        return -0.25 + 0.25 * (0.02 + 0.96 * u);
    };
    std::vector<std::pair<double, bool>> current;
    int since_improve = 0;
    for (int it = 0; it < budget; ++it) {
        std::vector<std::pair<double, bool>> roots;
        if (current.empty() || since_improve > 30) {
            // fresh start: split the forced zeros between the annuli in proportion to the target
            int nr = std::min(nforce, target_right);
            if (target_left > 0 && nr == nforce) nr = nforce - std::min(target_left, nforce / 2);
            for (int i = 0; i < nforce; ++i) roots.push_back({random_level(), i >= nr});
            since_improve = 0;
        } else {
            roots = current;
            std::normal_distribution<double> step(0.0, 0.01);
            for (auto& r : roots) r.first = std::clamp(r.first + step(rng), -0.25 + 1e-3, -1e-3);
        }
        auto e = build(roots);
        ++best.evaluations;
        if (!e) continue;
        Distribution d = distribution(*e, &tab);
        int r = d.right.count_with_multiplicity, l = d.left.count_with_multiplicity;
        int sc = score(r, l);
        if (sc > best_score) {
            best_score = sc;
            best.best = *e;
            best.right = r;
            best.left = l;
            current = roots;
            since_improve = 0;
            if (r >= target_right && l >= target_left) {
                best.reached = true;
                break;
            }
        } else {
            ++since_improve;
        }
    }
    return best;
}

}  // namespace eightloop
