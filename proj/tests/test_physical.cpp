// test_physical.cpp — coupling constant, scaled time and unit parsing
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "trilinear/physical.hpp"

using namespace trilinear;
using namespace trilinear::physical;

namespace {

CrystalParams crystal(double d_pm, double l_mm, double sigma_um) {
    CrystalParams p;
    p.d_eff = d_pm * 1e-12;
    p.length = l_mm * 1e-3;
    p.lambda_b = 775e-9;
    p.n_b = p.n_s1 = p.n_s2 = 1.8;
    p.sigma_b = sigma_um * 1e-6;
    p.pulse_duration = 1e-9;
    return p;
}

// Independent evaluation of the closed form from the SI constants.
double kappa_reference(const CrystalParams& p) {
    const double w = 2.0 * std::numbers::pi * 2.99792458e8 / p.lambda_b;
    const double n2 = std::pow(p.n_b * p.n_s1 * p.n_s2, 2);
    const double x = p.delta_kz * p.length / 2.0;
    const double s = x == 0.0 ? 1.0 : std::sin(x) / x;
    return p.d_eff / (2.0 * p.sigma_b) * std::sqrt(1.054571817e-34 * w * w * w / (std::numbers::pi * 8.8541878128e-12 * p.length * n2)) * s;
}

}  // namespace

TEST(Kappa, HighCornerExample) {
    const double k = kappa_gaussian(crystal(30, 1, 20));
    EXPECT_NEAR(k, kappa_reference(crystal(30, 1, 20)), 1e-9 * k);
    EXPECT_NEAR(k, 9.488134e5, 1e0);
    EXPECT_GE(k, 5e5);
    EXPECT_LE(k, 2e6);
}

TEST(Kappa, LowCornerExample) {
    const double k = kappa_gaussian(crystal(1, 10, 200));
    EXPECT_NEAR(k, kappa_reference(crystal(1, 10, 200)), 1e-9 * k);
    EXPECT_GE(k, 5e2);
    EXPECT_LE(k, 2e3);
}

TEST(Kappa, PhaseMatchingNull) {
    CrystalParams p = crystal(30, 1, 20);
    p.delta_kz = 2.0 * std::numbers::pi / p.length;
    EXPECT_NEAR(kappa_gaussian(p), 0.0, 1e-9 * kappa_gaussian(crystal(30, 1, 20)));
}

TEST(Kappa, LinearInNonlinearity) {
    const double k1 = kappa_gaussian(crystal(10, 2, 50));
    EXPECT_NEAR(kappa_gaussian(crystal(20, 2, 50)), 2.0 * k1, 1e-12 * k1);
}

TEST(Kappa, ScalingWithLengthAndWaist) {
    const double k = kappa_gaussian(crystal(10, 2, 50));
    EXPECT_NEAR(kappa_gaussian(crystal(10, 8, 50)), k / 2.0, 1e-12 * k);
    EXPECT_NEAR(kappa_gaussian(crystal(10, 2, 100)), k / 2.0, 1e-12 * k);
}

TEST(Kappa, ParameterBoxStaysInRange) {
    for (double d : {1.0, 5.0, 30.0})
        for (double l : {1.0, 3.0, 10.0})
            for (double s : {20.0, 60.0, 200.0}) {
                const CrystalParams p = crystal(d, l, s);
                const double k = kappa_gaussian(p);
                EXPECT_GE(k, 0.5e3) << d << " " << l << " " << s;
                EXPECT_LE(k, 2e6) << d << " " << l << " " << s;
                const double tau = tau_physical(k, p.pulse_duration);
                EXPECT_GE(tau, 0.5e-6);
                EXPECT_LE(tau, 2e-3);
            }
}

TEST(Kappa, VerboseFormAgreesWithGaussianOverlap) {
    for (double dk : {0.0, 500.0, 3000.0}) {
        CrystalParams p = crystal(12, 4, 35);
        p.delta_kz = dk;
        const double k = kappa_gaussian(p);
        const std::complex<double> v = kappa_verbose_prefactor(p, gaussian_overlap(p));
        EXPECT_NEAR(v.real(), k, 1e-9 * std::abs(kappa_gaussian(crystal(12, 4, 35))));
        EXPECT_EQ(v.imag(), 0.0);
    }
    EXPECT_EQ(kappa_verbose_prefactor(crystal(12, 4, 35), 0.0), std::complex<double>(0.0));
}

TEST(Kappa, RejectsNonPositiveParameters) {
    CrystalParams p = crystal(30, 1, 20);
    p.d_eff = 0.0;
    EXPECT_THROW(kappa_gaussian(p), NonPositiveParameter);
    p = crystal(30, 1, 20);
    p.sigma_b = -1e-6;
    EXPECT_THROW(kappa_gaussian(p), NonPositiveParameter);
    p = crystal(30, 1, 20);
    p.n_s2 = 0.0;
    EXPECT_THROW(kappa_gaussian(p), NonPositiveParameter);
}

TEST(Sinc, BoundsAndPhaseMatching) {
    EXPECT_EQ(sinc(0.0), 1.0);
    double lo = 1.0;
    for (int k = 1; k <= 20000; ++k) {
        const double v = sinc(0.001 * k);
        EXPECT_LE(v, 1.0);
        lo = std::min(lo, v);
    }
    EXPECT_NEAR(lo, -0.2172, 1e-4);
}

TEST(ScaledTime, Examples) {
    EXPECT_NEAR(tau_physical(1e6, 1e-9), 1e-3, 1e-18);
    EXPECT_NEAR(tau_physical(1e3, 1e-9), 1e-6, 1e-21);
    EXPECT_EQ(tau_physical(4.2e4, 0.0), 0.0);
    EXPECT_THROW(tau_physical(0.0, 1e-9), NonPositiveParameter);
    EXPECT_THROW(tau_physical(1e3, -1.0), NonPositiveParameter);
}

TEST(ScaledTime, InvariantUnderTimeUnitRescaling) {
    // kappa in 1/s times t in s equals kappa in 1/ns times t in ns
    const double k = kappa_gaussian(crystal(30, 1, 20));
    EXPECT_NEAR(tau_physical(k, 2e-9), tau_physical(k * 1e-9, 2.0), 1e-15);
}

TEST(Frequencies, SignalsAtHalfTheShFrequency) {
    const CrystalParams p = crystal(30, 1, 20);
    EXPECT_NEAR(p.omega_b(), 2.0 * std::numbers::pi * kSpeedOfLight / 775e-9, 1.0);
    EXPECT_EQ(p.omega_signal(), p.omega_b() / 2.0);
}

TEST(ParseQuantity, Units) {
    EXPECT_DOUBLE_EQ(parse_quantity("30pm/V", Dimension::Nonlinearity), 30e-12);
    EXPECT_DOUBLE_EQ(parse_quantity("1 mm", Dimension::Length), 1e-3);
    EXPECT_DOUBLE_EQ(parse_quantity("775nm", Dimension::Length), 775e-9);
    EXPECT_DOUBLE_EQ(parse_quantity("20um", Dimension::Length), 20e-6);
    EXPECT_DOUBLE_EQ(parse_quantity("20\xC2\xB5m", Dimension::Length), 20e-6);
    EXPECT_DOUBLE_EQ(parse_quantity("1ns", Dimension::Time), 1e-9);
    EXPECT_DOUBLE_EQ(parse_quantity("1.8", Dimension::Dimensionless), 1.8);
    EXPECT_DOUBLE_EQ(parse_quantity("2.5/m", Dimension::Wavenumber), 2.5);
    EXPECT_DOUBLE_EQ(parse_quantity("0.003", Dimension::Length), 0.003);
}

TEST(ParseQuantity, Errors) {
    EXPECT_THROW(parse_quantity("mm", Dimension::Length), ValidationError);
    EXPECT_THROW(parse_quantity("1ns", Dimension::Length), ValidationError);
    EXPECT_THROW(parse_quantity("3 furlongs", Dimension::Length), ValidationError);
}
