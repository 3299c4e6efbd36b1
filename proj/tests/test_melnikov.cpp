#include "eightloop/melnikov.hpp"
#include "eightloop/zeros.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace eightloop;

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

// Random coefficients with the first-order envelope removed.
PerturbationCoeffs random_admissible(std::mt19937& rng) {
    PerturbationCoeffs p = random_coeffs(rng);
    p.b[0][1] = -p.a[1][0];
    p.b[0][3] = -p.a[1][2] / 3.0;
    p.a[1][2] = -3.0 * p.b[0][3];
    p.b[1][1] = -2.0 * p.a[2][0];
    p.b[2][1] = -3.0 * p.a[3][0];
    return p;
}

// Oracle for the first-order envelope: the cycle integral of g dx - f dy.
double m1_oracle(const PerturbationCoeffs& p, const OvalSpec& sp) {
    return cycle_integral_fn([&](double x, double y, double dx, double dy) { return p.g(x, y) * dx - p.f(x, y) * dy; },
                             sp)
        .value;
}

}  // namespace

TEST(Melnikov, FirstOrderEnvelopeMatchesCycleIntegral) {
    std::mt19937 rng(101);
    for (int t = 0; t < 10; ++t) {
        PerturbationCoeffs p = random_coeffs(rng);
        for (auto an : {Annulus::Right, Annulus::Left})
            for (double h : {-0.23, -0.15, -0.07, -0.01}) {
                double ref = m1_oracle(p, {h, an});
                EXPECT_NEAR(evaluate_envelope(m1_envelope(p, an), {h, an}), ref, 1e-10 * (1.0 + std::abs(ref)));
            }
    }
}

TEST(Melnikov, FirstOrderViolationNamesCondition) {
    PerturbationCoeffs p;
    p.a[2][0] = 1.0;
    auto v = m1_violation(p);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(*v, "2 a20 + b11 = 0");
    EXPECT_THROW(m2_envelope(p), PreconditionError);
    p.b[1][1] = -2.0;
    EXPECT_FALSE(m1_violation(p).has_value());
}

TEST(Melnikov, SecondOrderEnvelopeMatchesFrancoise) {
    std::mt19937 rng(202);
    for (int t = 0; t < 10; ++t) {
        PerturbationCoeffs p = random_admissible(rng);
        ASSERT_FALSE(m1_violation(p).has_value());
        for (auto an : {Annulus::Right, Annulus::Left})
            for (int i = 0; i < 20; ++i) {
                double h = -0.25 + 0.25 * (i + 0.5) / 20.0;
                double ref = m2_via_francoise(p, {h, an});
                EXPECT_NEAR(evaluate_envelope(m2_envelope(p, an), {h, an}), ref, 1e-7 * (1.0 + std::abs(ref)));
            }
    }
}

TEST(Melnikov, LeftEnvelopeIsMirror) {
    std::mt19937 rng(5);
    PerturbationCoeffs p = random_admissible(rng);
    Envelope r = m2_envelope(p, Annulus::Right), l = m2_envelope(p, Annulus::Left);
    EXPECT_DOUBLE_EQ(l.beta0, -r.beta0);
    EXPECT_DOUBLE_EQ(l.beta1, -r.beta1);
    EXPECT_DOUBLE_EQ(l.alpha0, r.alpha0);
    // and the left envelope of p equals the right envelope of the point-reflected system
    Envelope q = m2_envelope(p.point_reflected(), Annulus::Right);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(q.coeffs()[k], l.coeffs()[k], 1e-14);
}

TEST(Melnikov, VanishingCasesOfSecondOrder) {
    // each case's structural conditions make the second-order envelope vanish identically
    auto check = [](PerturbationCoeffs p, Prop2Case expected) {
        p.b[0][1] = -p.a[1][0];
        p.b[2][1] = -3.0 * p.a[3][0];
        p.b[1][1] = -2.0 * p.a[2][0];
        EXPECT_EQ(prop2_case(p), expected);
        EXPECT_TRUE(m2_envelope(p).is_zero(1e-14));
    };
    PerturbationCoeffs a;  // lambda = 0, a20 = -a00
    a.a[0][0] = 0.7, a.a[2][0] = -0.7, a.b[1][2] = 1.3;
    check(a, Prop2Case::A);
    PerturbationCoeffs b;  // mu = 0, a30 = -a10
    b.a[1][0] = 0.4, b.a[3][0] = -0.4, b.b[0][2] = 2.0;
    check(b, Prop2Case::B);
    PerturbationCoeffs c;  // mu = lambda, a20 = -a10
    c.a[1][0] = 0.4, c.a[2][0] = -0.4, c.b[0][2] = 1.0, c.b[1][2] = 1.0;
    check(c, Prop2Case::C);
    PerturbationCoeffs d;  // mu = -lambda, a20 = a10
    d.a[1][0] = 0.4, d.a[2][0] = 0.4, d.b[0][2] = 1.0, d.b[1][2] = -1.0;
    check(d, Prop2Case::D);
    PerturbationCoeffs e;  // Q1 = 0
    e.b[0][2] = 1.0, e.a[0][1] = 3.0;
    check(e, Prop2Case::E);
}

TEST(Melnikov, ThirdOrderPreconditions) {
    PerturbationCoeffs p;
    p.b[0][2] = 1.0;
    p.a[0][0] = 1.0;  // no vanishing case: M2 != 0
    EXPECT_THROW(m3_envelope(p), PreconditionError);
    PerturbationCoeffs b;
    b.a[1][0] = 1.0, b.a[3][0] = -1.0, b.b[2][1] = 3.0, b.b[0][1] = -1.0, b.b[0][2] = 1.0, b.b[0][0] = 0.3;
    Envelope e = m3_envelope(b);
    EXPECT_EQ(e.order, 3);
    EXPECT_DOUBLE_EQ(e.alpha0, stratum_m(b, Prop2Case::B) * 0.3);
    ASSERT_TRUE(m3_violation(b).has_value());
    EXPECT_EQ(*m3_violation(b), "b00 = 0");
}

TEST(Melnikov, FourthOrderCaseB) {
    // case (b) with the third-order conditions: M4 = K (1/4 + h) I1, K = 6 a10^3 lambda
    PerturbationCoeffs p;
    p.a[1][0] = 0.5, p.a[3][0] = -0.5, p.b[0][1] = -0.5, p.b[2][1] = 1.5;
    p.a[1][1] = 2.0 / 3.0, p.b[0][2] = 2.0 / 3.0;  // lambda = 1 = 3 a11 / 2
    p.b[1][0] = 0.25, p.b[3][0] = -0.25;
    ASSERT_EQ(prop2_case(p), Prop2Case::B);
    ASSERT_FALSE(m3_violation(p).has_value()) << *m3_violation(p);
    Envelope e = m4_envelope(p);
    double K = 6.0 * 0.125 * p.lambda();
    EXPECT_NEAR(e.beta0, K / 4.0, 1e-14);
    EXPECT_NEAR(e.beta1, K, 1e-14);
    EXPECT_EQ(classify_stratum(p).first_nonvanishing, 4);
}

TEST(Melnikov, StratumClassification) {
    // Hamiltonian perturbation f = Q_y, g = -Q_x with Q = x^2 y + y^3
    PerturbationCoeffs ham;
    ham.a[2][0] = 1.0, ham.a[0][2] = 3.0, ham.b[1][1] = -2.0;
    EXPECT_EQ(classify_stratum(ham).stratum, Stratum::Hamiltonian);
    // case (e): reversible in y
    PerturbationCoeffs ry;
    ry.b[0][2] = 1.0, ry.a[0][1] = 3.0;
    EXPECT_EQ(classify_stratum(ry).stratum, Stratum::ReversibleY);
    PerturbationCoeffs ex = reversible_x_system(1.0, 10.0, 2.0, 0.0, 1.0);
    VanishingStratum s = classify_stratum(ex);
    EXPECT_EQ(s.stratum, Stratum::ReversibleX);
    EXPECT_EQ(s.case_tag, Prop2Case::A);
    EXPECT_EQ(s.vanishes_through, 4);
    PerturbationCoeffs gen;
    gen.a[1][0] = 1.0;
    EXPECT_EQ(classify_stratum(gen).first_nonvanishing, 1);
    EXPECT_TRUE(classify_stratum(ex, 2).undetermined);
}

TEST(Melnikov, DarbouxParametersOfExample) {
    // first integral (x^2 - y + 5)^2 / (x^2 - y^2 - y + 2)
    DarbouxIntegral d = darboux_parameters(reversible_x_system(1.0, 10.0, 2.0, 0.0, 1.0), 1.0);
    EXPECT_EQ(d.variant, DarbouxVariant::A03Zero_PosA21);
    EXPECT_NEAR(d.B1.real(), -1.0, 1e-15);
    EXPECT_NEAR(d.C1.real(), 5.0, 1e-15);
    EXPECT_NEAR(d.C2.real(), 2.0, 1e-15);
    EXPECT_NEAR(d.A2.real(), -1.0, 1e-15);
    EXPECT_NEAR(d.n1.real(), 2.0, 1e-15);
    EXPECT_NEAR(d.n2.real(), -1.0, 1e-15);
    EXPECT_THROW(darboux_parameters(PerturbationCoeffs{}, 0.0), std::invalid_argument);
}

TEST(Melnikov, SmallAmplitudeCoefficientsMatchEnvelope) {
    // Oracle: M2 / (kC1 s) at small s from quadrature against sum m_k s^(k-1)
    Envelope e{0.3, -1.2, 0.7, 0.4, -0.9, 1.1, 2, Annulus::Right};
    auto m = small_amplitude_coeffs(e, 40);
    for (double s : {0.05, 0.08, 0.1}) {
        double series = 0.0;
        for (int k = 40; k >= 1; --k) series = series * s + m[k];
        double direct = evaluate_envelope(e, {s - 0.25}) / (kC1 * s);
        EXPECT_NEAR(series, direct, 1e-9) << s;
    }
}

TEST(Melnikov, Theorem4BaseParameters) {
    Theorem4Construction five = theorem4_construction(Theorem4Target::FiveZero);
    EXPECT_EQ(five.alpha0_bar, rat(-272, 539));
    EXPECT_EQ(five.beta0_bar, rat(-384, 77));
    EXPECT_EQ(five.base.alpha1, rat(1193, 539));
    EXPECT_EQ(five.base.beta1, rat(-180, 77));
    EXPECT_EQ(five.gamma0_bar, rat(2960, 539));
    EXPECT_EQ(five.leading, rat(117, 4096));
    // the mirror expansion starts with 768/77 s + 360/77 s^2
    auto mm = small_amplitude_coeffs(five.base.mirrored(), 3);
    EXPECT_EQ(mm[1], rat(768, 77));
    EXPECT_EQ(mm[2], rat(360, 77));

    Theorem4Construction four = theorem4_construction(Theorem4Target::FourOne);
    EXPECT_EQ(four.leading, rat(-9, 128));
    EXPECT_EQ(four.alpha0_bar, rat(-16, 49));
    EXPECT_EQ(four.base.beta1, rat(-12, 7));
    auto fm = small_amplitude_coeffs(four.base.mirrored(), 2);
    EXPECT_EQ(fm[2], rat(24, 7));

    Theorem4Construction three = theorem4_construction(Theorem4Target::ThreeThree);
    EXPECT_EQ(three.alpha0_bar, rat(8, 7));
    EXPECT_EQ(three.base.alpha1, rat(-11, 7));
    EXPECT_EQ(three.gamma0_bar, rat(-8, 7));
    EXPECT_EQ(three.base.beta0, 0);
    EXPECT_EQ(three.leading, rat(15, 32));
}

TEST(Melnikov, Theorem4BasesVanishToClaimedOrder) {
    // Oracle: M2(s) / s^(n+1) from quadrature tends to kC1 * leading.
    for (auto t : {Theorem4Target::FiveZero, Theorem4Target::ThreeThree, Theorem4Target::FourOne}) {
        Theorem4Construction c = theorem4_construction(t);
        Envelope e = c.base.to_double();
        int n = c.n_conditions;
        double s1 = 0.02, s2 = 0.01;
        double r1 = evaluate_envelope(e, {s1 - 0.25}) / (kC1 * std::pow(s1, n + 1));
        double r2 = evaluate_envelope(e, {s2 - 0.25}) / (kC1 * std::pow(s2, n + 1));
        double extrap = 2.0 * r2 - r1;  // remove the O(s) correction
        EXPECT_NEAR(extrap, to_double(c.leading), 0.02 * std::abs(to_double(c.leading))) << to_string(t);
    }
}

TEST(Melnikov, FiveZeroMirrorPositive) {
    Envelope m = theorem4_construction(Theorem4Target::FiveZero).base.to_double().mirrored();
    for (int i = 1; i < 200; ++i) {
        double h = -0.25 + 0.25 * i / 200.0;
        EXPECT_GT(evaluate_envelope(m, {h}), 0.0) << h;
    }
}

TEST(Melnikov, LadderDeltasAlternate) {
    for (auto t : {Theorem4Target::FiveZero, Theorem4Target::ThreeThree, Theorem4Target::FourOne}) {
        Theorem4Construction c = theorem4_construction(t);
        RationalEnvelope e = theorem4_ladder(c, default_ladder_levels(t));
        auto d = ladder_deltas(e, c.n_conditions);
        ASSERT_EQ(static_cast<int>(d.size()), c.n_conditions);
        EXPECT_LT(d[0], 0) << to_string(t);
        for (std::size_t i = 1; i < d.size(); ++i) {
            EXPECT_LT(d[i] * d[i - 1], 0) << to_string(t) << " " << i;
            EXPECT_GT(abs(d[i]), abs(d[i - 1])) << to_string(t) << " " << i;
        }
    }
}

TEST(Melnikov, LadderRealizesDistributions) {
    for (auto t : {Theorem4Target::FiveZero, Theorem4Target::ThreeThree, Theorem4Target::FourOne}) {
        Theorem4Construction c = theorem4_construction(t);
        RationalEnvelope e = theorem4_ladder(c, default_ladder_levels(t));
        ZeroReport r = count_envelope_zeros(e, Annulus::Right);
        ZeroReport l = count_envelope_zeros(e, Annulus::Left);
        EXPECT_EQ(r.count_with_multiplicity, c.expected_right) << to_string(t);
        EXPECT_EQ(l.count_with_multiplicity, c.expected_left) << to_string(t);
        for (const Zero& z : r.zeros) EXPECT_EQ(z.multiplicity, 1);
    }
}

TEST(Melnikov, PerturbationForEnvelopeRoundTrip) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        Envelope e{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), 2, Annulus::Right};
        PerturbationCoeffs p = perturbation_for_envelope(e, 1.0, 2.0);
        // the first-order conditions hold exactly in floating point
        EXPECT_EQ(p.a[1][0] + p.b[0][1], 0.0);
        EXPECT_EQ(p.a[1][2] + 3.0 * p.b[0][3], 0.0);
        EXPECT_EQ(2.0 * p.a[2][0] + p.b[1][1], 0.0);
        EXPECT_EQ(3.0 * p.a[3][0] + p.b[2][1], 0.0);
        Envelope back = m2_envelope(p);
        for (int k = 0; k < 6; ++k) EXPECT_NEAR(back.coeffs()[k], e.coeffs()[k], 1e-12 * (1.0 + std::abs(e.coeffs()[k])));
    }
}
