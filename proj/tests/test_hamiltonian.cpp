#include "eightloop/hamiltonian.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace eightloop;

TEST(Hamiltonian, CriticalValues) {
    EXPECT_DOUBLE_EQ(hamiltonian_value(1.0, 0.0), -0.25);
    EXPECT_DOUBLE_EQ(hamiltonian_value(-1.0, 0.0), -0.25);
    EXPECT_DOUBLE_EQ(hamiltonian_value(0.0, 0.0), 0.0);
    EXPECT_NEAR(hamiltonian_value(std::sqrt(2.0), 0.0), 0.0, 1e-15);
}

TEST(Hamiltonian, OvalRangeEndpointsLieOnLevel) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-0.25, 0.0);
    for (int i = 0; i < 500; ++i) {
        double h = U(rng);
        for (auto an : {Annulus::Right, Annulus::Left}) {
            auto [lo, hi] = oval_x_range({h, an});
            EXPECT_LT(lo, hi);
            EXPECT_NEAR(hamiltonian_value(lo, 0.0), h, 1e-14);
            EXPECT_NEAR(hamiltonian_value(hi, 0.0), h, 1e-14);
            if (an == Annulus::Right) {
                EXPECT_GT(lo, 0.0);
            } else {
                EXPECT_LT(hi, 0.0);
            }
        }
    }
}

TEST(Hamiltonian, OvalRangeDegenerateEnds) {
    auto [lo, hi] = oval_x_range({-0.25, Annulus::Right});
    EXPECT_DOUBLE_EQ(lo, 1.0);
    EXPECT_DOUBLE_EQ(hi, 1.0);
    auto [l0, h0] = oval_x_range({0.0, Annulus::Left});
    EXPECT_NEAR(l0, -std::sqrt(2.0), 1e-15);
    EXPECT_EQ(h0, 0.0);
}

TEST(Hamiltonian, OvalHeightOnLevelSet) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-0.2499, -1e-4), T(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        OvalSpec sp{U(rng), i % 2 ? Annulus::Left : Annulus::Right};
        auto [lo, hi] = oval_x_range(sp);
        double x = lo + (hi - lo) * T(rng);
        double y = oval_height(x, sp);
        EXPECT_NEAR(hamiltonian_value(x, y), sp.h, 1e-14);
    }
    EXPECT_THROW(oval_height(3.0, {-0.1}), DomainError);
}

TEST(Hamiltonian, LevelOutsideIntervalRejected) {
    EXPECT_THROW(oval_x_range({0.1}), DomainError);
    EXPECT_THROW(oval_x_range({-0.3}), DomainError);
    EXPECT_THROW(require_level(std::nan("")), DomainError);
}

namespace {

PerturbationCoeffs random_coeffs(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    PerturbationCoeffs p;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; i + j < 4; ++j) {
            p.a[i][j] = U(rng);
            p.b[i][j] = U(rng);
        }
    return p;
}

}  // namespace

TEST(Hamiltonian, PolynomialEvaluation) {
    PerturbationCoeffs p;
    p.a[2][1] = 3.0;
    p.a[0][3] = -1.0;
    p.b[1][0] = 2.0;
    p.b[0][0] = 0.5;
    EXPECT_DOUBLE_EQ(p.f(2.0, 3.0), 3.0 * 4.0 * 3.0 - 27.0);
    EXPECT_DOUBLE_EQ(p.g(2.0, 3.0), 4.5);
    EXPECT_DOUBLE_EQ(p.lambda(), 0.0);
    EXPECT_DOUBLE_EQ(p.mu(), 3.0);
}

TEST(Hamiltonian, PointReflectionConjugatesTheField) {
    // (x, y) -> (-x, -y) maps the system with p to the system with point_reflected(p).
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
        PerturbationCoeffs p = random_coeffs(rng);
        PerturbationCoeffs q = p.point_reflected();
        double x = U(rng), y = U(rng), eps = 0.01;
        auto [fx, fy] = vector_field(x, y, p, eps);
        auto [gx, gy] = vector_field(-x, -y, q, eps);
        EXPECT_NEAR(gx, -fx, 1e-14);
        EXPECT_NEAR(gy, -fy, 1e-14);
        PerturbationCoeffs back = q.point_reflected();
        EXPECT_EQ(back.a, p.a);
        EXPECT_EQ(back.b, p.b);
    }
}

TEST(Hamiltonian, UnperturbedFieldConservesEnergy) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    PerturbationCoeffs p = random_coeffs(rng);
    for (int i = 0; i < 200; ++i) {
        double x = U(rng), y = U(rng);
        auto [fx, fy] = vector_field(x, y, p, 0.0);
        EXPECT_NEAR((x * x * x - x) * fx + y * fy, 0.0, 1e-13);
    }
}

TEST(Hamiltonian, ScaledAndFinite) {
    PerturbationCoeffs p;
    p.a[1][0] = 2.0;
    EXPECT_DOUBLE_EQ(p.scaled(0.5).a[1][0], 1.0);
    EXPECT_TRUE(p.all_finite());
    p.b[0][0] = INFINITY;
    EXPECT_FALSE(p.all_finite());
}
