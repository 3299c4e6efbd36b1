#include "eightloop/picard_fuchs.hpp"

#include <gtest/gtest.h>

using namespace eightloop;

namespace {

std::array<double, 2> I02(double h) {
    return {basic_integral_quadrature(0, {h}).value, basic_integral_quadrature(2, {h}).value};
}

// Fourth-order central difference of the (k-1)-th derivative computed by the chain.
std::array<double, 2> fd_next(double h, int k, double d) {
    auto row = [&](double x) {
        auto D = derivatives_via_pf(x, k - 1, I02(x)[0], I02(x)[1]);
        return std::array<double, 2>{D.rows[k - 1][0], D.rows[k - 1][2]};
    };
    auto p1 = row(h + d), m1 = row(h - d), p2 = row(h + 2 * d), m2 = row(h - 2 * d);
    std::array<double, 2> out;
    for (int i = 0; i < 2; ++i) out[i] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * d);
    return out;
}

}  // namespace

TEST(PicardFuchs, SystemHoldsAgainstFiniteDifferences) {
    // I = A(h) I' with I' from finite differences of the quadrature values.
    for (int i = 1; i < 20; ++i) {
        double h = -0.25 + 0.25 * i / 20.0;
        double d = 1e-3 * std::min(h + 0.25, -h);
        auto I = I02(h);
        std::array<double, 2> Ip;
        for (int q = 0; q < 2; ++q)
            Ip[q] = (8.0 * (I02(h + d)[q] - I02(h - d)[q]) - (I02(h + 2 * d)[q] - I02(h - 2 * d)[q])) / (12.0 * d);
        auto lhs = pf_apply(h) * Ip;
        EXPECT_NEAR(lhs[0], I[0], 1e-8 * std::abs(I[0])) << h;
        EXPECT_NEAR(lhs[1], I[1], 1e-8 * std::abs(I[1])) << h;
    }
}

TEST(PicardFuchs, FirstMatrixInvertsSystem) {
    for (double h : {-0.2, -0.13, -0.05}) {
        Mat2 P = pf_apply(h) * pf_derivative_matrix(1, h);
        EXPECT_NEAR(P.a, 1.0, 1e-13);
        EXPECT_NEAR(P.b, 0.0, 1e-13);
        EXPECT_NEAR(P.c, 0.0, 1e-13);
        EXPECT_NEAR(P.d, 1.0, 1e-13);
    }
}

TEST(PicardFuchs, DerivativeChainAgainstFiniteDifferences) {
    for (int i = 1; i < 12; ++i) {
        double h = -0.25 + 0.25 * i / 12.0;
        double d = 2e-3 * std::min(h + 0.25, -h);
        auto D = derivatives_via_pf(h, 4, I02(h)[0], I02(h)[1]);
        for (int k = 1; k <= 4; ++k) {
            auto fd = fd_next(h, k, d);
            EXPECT_NEAR(D.rows[k][0], fd[0], 1e-8 * std::abs(D.rows[k][0])) << "k=" << k << " h=" << h;
            EXPECT_NEAR(D.rows[k][2], fd[1], 1e-8 * std::abs(D.rows[k][2])) << "k=" << k << " h=" << h;
        }
    }
}

TEST(PicardFuchs, SeriesAndChainAgreeAtSwitchLevel) {
    double h = 0.079 - 0.25;
    const auto& cd = center_coefficients_double();
    auto s0 = center_series_derivs(cd[0], 0.079, 4, 0);
    auto s2 = center_series_derivs(cd[1], 0.079, 4, 0);
    auto D = derivatives_via_pf(h, 4);
    for (int k = 0; k <= 4; ++k) {
        EXPECT_NEAR(D.rows[k][0] / s0[k], 1.0, 1e-10) << k;
        EXPECT_NEAR(D.rows[k][2] / s2[k], 1.0, 1e-10) << k;
    }
}

TEST(PicardFuchs, NearSingularFlag) {
    EXPECT_TRUE(derivatives_via_pf(-1e-8, 2, 1.3, 1.0).near_singular);
    EXPECT_FALSE(derivatives_via_pf(-0.1, 2, 1.0, 1.0).near_singular);
    EXPECT_THROW(derivatives_via_pf(-0.1, 5, 1.0, 1.0), std::invalid_argument);
}

TEST(PicardFuchs, CenterClosedFormsMatchRecursion) {
    CenterCoefficients c = center_coefficients(40);
    for (int k = 1; k <= 40; ++k) {
        EXPECT_EQ(center_closed_form_a(k), c.a[k]) << k;
        EXPECT_EQ(center_closed_form_c(k), c.c[k]) << k;
    }
}

TEST(PicardFuchs, CenterCoefficientsSolveSystemTermwise) {
    // Independent oracle: substitute the series into I = A I' and compare coefficients of s^k.
    // With h = s - 1/4: I0 = 4h/3 I0' + I2'/3, I2 = 4h/15 I0' + 4(3h+1)/15 I2'.
    CenterCoefficients c = center_coefficients(30);
    auto coef = [&](const std::vector<Rational>& v, int k) { return k >= 1 && k <= 30 ? v[k] : Rational(0); };
    for (int k = 1; k < 29; ++k) {
        // s^k coefficient of h f' = (s - 1/4) f': k f_k - (k+1)/4 f_{k+1}
        auto hd = [&](const std::vector<Rational>& v) { return Rational(k) * coef(v, k) - Rational(k + 1) / 4 * coef(v, k + 1); };
        auto d = [&](const std::vector<Rational>& v) { return Rational(k + 1) * coef(v, k + 1); };
        EXPECT_EQ(coef(c.a, k), rat(4, 3) * hd(c.a) + rat(1, 3) * d(c.c)) << k;
        EXPECT_EQ(coef(c.c, k), rat(4, 15) * hd(c.a) + rat(12, 15) * hd(c.c) + rat(4, 15) * d(c.c)) << k;
    }
}

TEST(PicardFuchs, ReferenceZeroEndSeries) {
    SeriesExpansion z = series_at_zero(6);
    std::vector<Rational> phi0 = {0, -1, rat(35, 8), rat(-1155, 64)};
    std::vector<Rational> phi2 = {0, 0, rat(1, 2), rat(-21, 8), rat(3003, 256)};
    std::vector<Rational> psi0 = {rat(4, 3), rat(-11, 6), rat(179, 24), rat(-11639, 384)};
    std::vector<Rational> psi2 = {rat(16, 15), rat(-4, 15), rat(16, 15), rat(-143, 30), rat(313009, 15360)};
    for (std::size_t k = 0; k < phi0.size(); ++k) EXPECT_EQ(z.log_coeffs_I0[k], phi0[k]) << k;
    for (std::size_t k = 0; k < phi2.size(); ++k) EXPECT_EQ(z.log_coeffs_I2[k], phi2[k]) << k;
    for (std::size_t k = 0; k < psi0.size(); ++k) EXPECT_EQ(z.coeffs_I0[k], psi0[k]) << k;
    for (std::size_t k = 0; k < psi2.size(); ++k) EXPECT_EQ(z.coeffs_I2[k], psi2[k]) << k;
}

TEST(PicardFuchs, ZeroEndSeriesMatchesQuadrature) {
    SeriesExpansion z = series_at_zero(kMaxZeroTerms);
    for (double h : {-1e-4, -1e-3, -5e-3, -0.01}) {
        auto J = z.evaluate(h);
        double I1 = kC1 * (h + 0.25);
        EXPECT_NEAR(J[0], basic_integral(0, {h}).value / I1, 1e-10) << h;
        EXPECT_NEAR(J[1], basic_integral(2, {h}).value / I1, 1e-10) << h;
    }
    // the saddle-level limits: J(0) = sigma (4/3, 16/15)
    auto J = z.evaluate(-1e-14);
    EXPECT_NEAR(J[0], kSigma * 4.0 / 3.0, 1e-9);
    EXPECT_NEAR(J[1], kSigma * 16.0 / 15.0, 1e-9);
}

TEST(PicardFuchs, CenterExpansionEvaluate) {
    SeriesExpansion c = series_at_center(30);
    auto v = c.evaluate(-0.2);
    EXPECT_NEAR(v[0], basic_integral_quadrature(0, {-0.2}).value, 1e-12);
    EXPECT_NEAR(v[1], basic_integral_quadrature(2, {-0.2}).value, 1e-12);
}
