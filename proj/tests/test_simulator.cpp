#include "eightloop/simulator.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace eightloop;

namespace {

// M1 = M2 = 0 is not required here: a generic perturbation.
PerturbationCoeffs generic() {
    PerturbationCoeffs p;
    p.a[1][0] = 0.4, p.b[0][1] = 0.1, p.a[2][0] = -0.3, p.b[1][1] = 0.2;
    p.a[1][2] = 0.5, p.b[0][3] = -0.1, p.a[3][0] = 0.2, p.b[2][1] = 0.1;
    p.a[0][0] = 0.3, p.b[2][0] = -0.2, p.a[1][1] = 0.15;
    return p;
}

// First-order conditions hold exactly in floating point.
PerturbationCoeffs second_order() {
    PerturbationCoeffs p;
    p.a[0][0] = 0.125, p.a[0][2] = 0.25;
    p.a[1][0] = 0.375, p.b[0][1] = -0.375;
    p.a[2][0] = 0.25, p.b[1][1] = -0.5;
    p.a[3][0] = 0.25, p.b[2][1] = -0.75;
    p.a[1][2] = 0.75, p.b[0][3] = -0.25;
    p.b[0][2] = 0.5, p.b[1][2] = 0.75;  // lambda, mu
    return p;
}

// Case (b): mu = 0, a10 + a30 = 0, a00 = a20 = a02 = a12 = 0, with m = 2 a10 lambda != 0.
PerturbationCoeffs third_order() {
    PerturbationCoeffs p;
    p.a[1][0] = 0.5, p.b[0][1] = -0.5;
    p.a[3][0] = -0.5, p.b[2][1] = 1.5;
    p.b[0][2] = 0.5;
    p.b[0][0] = 0.25, p.b[1][0] = 0.375, p.b[2][0] = 0.125, p.a[1][1] = 0.125, p.a[2][1] = 0.25;
    p.b[1][2] = -0.25;  // mu = a21 + b12 = 0
    return p;
}

}  // namespace

TEST(Simulator, FirstOrderExtraction) {
    PerturbationCoeffs p = generic();
    for (auto an : {Annulus::Right, Annulus::Left}) {
        for (double h : {-0.2, -0.1, -0.03}) {
            double ref = evaluate_envelope(m1_envelope(p, an), {h});
            MelnikovEstimate est = extract_melnikov(h, p, 1, an);
            EXPECT_NEAR(est.value, ref, 1e-3 * std::abs(ref)) << to_string(an) << " " << h;
        }
    }
}

TEST(Simulator, SecondOrderExtraction) {
    PerturbationCoeffs p = second_order();
    ASSERT_FALSE(m1_violation(p));
    for (auto an : {Annulus::Right, Annulus::Left}) {
        for (double h : {-0.2, -0.12, -0.05}) {
            double ref = evaluate_envelope(m2_envelope(p, an), {h});
            MelnikovEstimate est = extract_melnikov(h, p, 2, an);
            EXPECT_NEAR(est.value, ref, 1e-2 * std::abs(ref)) << to_string(an) << " " << h;
        }
    }
}

TEST(Simulator, ThirdOrderExtraction) {
    PerturbationCoeffs p = third_order();
    ASSERT_EQ(prop2_case(p), Prop2Case::B);
    ASSERT_TRUE(m2_envelope(p).is_zero(1e-15));
    for (double h : {-0.2, -0.1}) {
        double ref = evaluate_envelope(m3_envelope(p), {h});
        MelnikovEstimate est = extract_melnikov(h, p, 3, Annulus::Right);
        EXPECT_NEAR(est.value, ref, 5e-2 * std::abs(ref)) << h;
    }
}

TEST(Simulator, ExtractionPreconditions) {
    EXPECT_THROW(extract_melnikov(-0.1, generic(), 2, Annulus::Right), PreconditionError);
    EXPECT_THROW(extract_melnikov(-0.1, second_order(), 3, Annulus::Right), PreconditionError);
    EXPECT_THROW(extract_melnikov(-0.1, generic(), 4, Annulus::Right), std::invalid_argument);
    EXPECT_THROW(displacement_map(0.1, generic(), 0.01, Annulus::Right), DomainError);
}

TEST(Simulator, PointReflectionDuality) {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> U(-1.0, 1.0), H(-0.24, -0.01);
    for (int i = 0; i < 10; ++i) {
        PerturbationCoeffs p;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; a + b < 4; ++b) p.a[a][b] = U(rng), p.b[a][b] = U(rng);
        double h = H(rng);
        double dl = displacement_map(h, p, 1e-2, Annulus::Left).d;
        double dr = displacement_map(h, p.point_reflected(), 1e-2, Annulus::Right).d;
        EXPECT_NEAR(dl, dr, 1e-9 * std::max(1e-6, std::abs(dr)));
    }
}

TEST(Simulator, HamiltonianPerturbationHasNoDisplacement) {
    // f = K_y, g = -K_x with K = y^3 / 3 + x^2 y, which vanishes on the section
    PerturbationCoeffs p;
    p.a[0][2] = 1.0, p.a[2][0] = 1.0, p.b[1][1] = -2.0;
    for (auto an : {Annulus::Right, Annulus::Left})
        for (double h : {-0.2, -0.1, -0.02}) EXPECT_LE(std::abs(displacement_map(h, p, 0.05, an).d), 1e-12) << h;
}

TEST(Simulator, BlowUpIsReported) {
    PerturbationCoeffs p;
    p.a[2][0] = 1.0;
    EXPECT_THROW(integrate_orbit(2.0, 2.0, p, 1.0, 10.0), SimulationError);
    auto orbit = integrate_orbit(1.2, 0.0, PerturbationCoeffs{}, 0.0, 20.0, 200);
    ASSERT_EQ(orbit.size(), 201u);
    for (const auto& s : orbit) EXPECT_NEAR(hamiltonian_value(s.x, s.y), hamiltonian_value(1.2, 0.0), 1e-11);
}

TEST(Simulator, ReturnTimeGrowsTowardTheLoop) {
    double t1 = displacement_map(-0.2, generic(), 1e-3, Annulus::Right).return_time;
    double t2 = displacement_map(-1e-4, generic(), 1e-3, Annulus::Right).return_time;
    EXPECT_NEAR(t1 / (2.0 * M_PI / std::sqrt(2.0)), 1.0, 0.2);
    EXPECT_GT(t2, 2.0 * t1);
}

TEST(Simulator, SimpleZeroGivesOneCycle) {
    // M1 = I0 + beta0 I1 with a simple zero at hs
    const double hs = -0.12;
    auto I = basis_integrals(hs);
    PerturbationCoeffs p;
    p.a[1][0] = 1.0;
    p.a[2][0] = -0.5 * I[0] / I[1];
    const double eps = 1e-3;
    CycleSearchOptions opt;
    opt.grid = 60;
    opt.h_tol = 1e-10;
    auto cycles = find_limit_cycles(p, eps, Annulus::Right, opt);
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_LT(std::abs(cycles[0].h_star - hs), 20.0 * eps * std::abs(hs));
    EXPECT_LT(cycles[0].residual, 1e-9);
    // on the left M1 = I0 - beta0 I1 keeps one sign
    EXPECT_TRUE(find_limit_cycles(p, eps, Annulus::Left, opt).empty());
}

TEST(Simulator, NoCyclesWithoutZeros) {
    PerturbationCoeffs p;
    p.a[1][0] = 1.0;  // M1 = I0 > 0
    CycleSearchOptions opt;
    opt.grid = 40;
    EXPECT_TRUE(find_limit_cycles(p, 1e-3, Annulus::Right, opt).empty());
    EXPECT_TRUE(find_limit_cycles(p, 1e-3, Annulus::Left, opt).empty());
}

TEST(Darboux, ExampleResidual) {
    PerturbationCoeffs p = darboux_example();
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    std::vector<std::array<double, 2>> pts;
    DarbouxIntegral D = darboux_parameters(p, 1.0);
    while (pts.size() < 100) {
        double x = U(rng), y = U(rng);
        if (std::abs(D.F1(x, y)) > 1e-3 && std::abs(D.F2(x, y)) > 1e-3) pts.push_back({x, y});
    }
    EXPECT_LE(darboux_residual(p, 1.0, pts), 1e-12);
    EXPECT_THROW(darboux_residual(p, 1.0, {{0.5, 0.5}, {0.0, 1.0}}), DomainError);
}

TEST(Darboux, GenericReversibleResidual) {
    std::mt19937 rng(67);
    std::uniform_real_distribution<double> U(-1.0, 1.0), E(0.01, 0.3);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        double a03 = i % 4 == 0 ? 0.0 : U(rng);
        PerturbationCoeffs p = reversible_x_system(U(rng), U(rng), U(rng), a03, U(rng));
        double eps = E(rng);
        DarbouxIntegral D = darboux_parameters(p, eps);
        std::vector<std::array<double, 2>> pts;
        while (pts.size() < 50) {
            double x = 1.5 * U(rng), y = 1.5 * U(rng);
            if (std::abs(D.F1(x, y)) > 1e-2 && std::abs(D.F2(x, y)) > 1e-2) pts.push_back({x, y});
        }
        EXPECT_LE(darboux_residual(p, eps, pts), 1e-10) << i << " " << to_string(D.variant);
        ++checked;
    }
    EXPECT_EQ(checked, 40);
}

TEST(Darboux, ExampleIntegralConservedAlongOrbits) {
    PerturbationCoeffs p = darboux_example();
    for (auto [x0, y0] : {std::pair{0.0, 0.5}, std::pair{0.3, -0.5}, std::pair{0.1, 0.2}}) {
        double H0 = darboux_example_integral(x0, y0);
        auto orbit = integrate_orbit(x0, y0, p, 1.0, 2.0, 50, 1e-14);
        for (const auto& s : orbit) EXPECT_NEAR(darboux_example_integral(s.x, s.y) / H0, 1.0, 1e-8) << s.t;
    }
}

TEST(Darboux, ExampleSaddle) {
    SaddleCheck c = darboux_example_saddle_check();
    EXPECT_LT(c.field_norm, 1e-14);
    EXPECT_LT(c.level_gap, 1e-12);
}
