// physical.hpp — coupling constant kappa and scaled time tau from crystal and beam parameters
//
// SI units throughout. The SH frequency fixes both signal frequencies at half
// of it; the transverse modes are Gaussians with signal radii sqrt(2) times the
// SH radius, and the nonlinearity is uniform over a crystal centred at z = 0.
#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace trilinear::physical {

inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kSpeedOfLight = 2.99792458e8;   // m/s

struct CrystalParams {
    double d_eff = 0.0;           // m/V
    double length = 0.0;          // L_z, m
    double lambda_b = 0.0;        // SH vacuum wavelength, m
    double n_b = 1.0;
    double n_s1 = 1.0;
    double n_s2 = 1.0;
    double sigma_b = 0.0;         // SH Gaussian radius, m
    double delta_kz = 0.0;        // longitudinal mismatch, 1/m
    double pulse_duration = 0.0;  // s

    double omega_b() const { return 2.0 * std::numbers::pi * kSpeedOfLight / lambda_b; }
    double omega_signal() const { return omega_b() / 2.0; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NonPositiveParameter(std::string("CrystalParams: ") + name + " must be > 0, got " + std::to_string(v));
            }
        };
        positive(d_eff, "d_eff");
        positive(length, "L_z");
        positive(lambda_b, "lambda_b");
        positive(n_b, "n_b");
        positive(n_s1, "n_s1");
        positive(n_s2, "n_s2");
        positive(sigma_b, "sigma_b");
        if (!std::isfinite(delta_kz)) throw ValidationError("CrystalParams: delta_kz must be finite");
        if (!(pulse_duration >= 0.0)) throw NonPositiveParameter("CrystalParams: pulse_duration must be >= 0");
    }
};

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Closed form for Gaussian modes and uniform poling.
inline double kappa_gaussian(const CrystalParams& p) {
    p.validate();
    const double w = p.omega_b();
    const double n2 = p.n_b * p.n_b * p.n_s1 * p.n_s1 * p.n_s2 * p.n_s2;
    return p.d_eff / (2.0 * p.sigma_b) * std::sqrt(kHbar * w * w * w / (std::numbers::pi * kEpsilon0 * p.length * n2)) *
           sinc(p.delta_kz * p.length / 2.0);
}

// Overlap integral for the same mode assumptions (units 1/m):
// transverse part 1/(sqrt(2 pi) sigma_b), longitudinal part L sinc(dk L / 2).
inline std::complex<double> gaussian_overlap(const CrystalParams& p) {
    p.validate();
    return p.length * sinc(p.delta_kz * p.length / 2.0) / (std::sqrt(2.0 * std::numbers::pi) * p.sigma_b);
}

// kappa = 2 d_eff sqrt(hbar w_b w_s1 w_s2 / (2 eps0 L^3 n_b^2 n_s1^2 n_s2^2)) Phi, for any supplied Phi.
inline std::complex<double> kappa_verbose_prefactor(const CrystalParams& p, std::complex<double> phi_overlap) {
    p.validate();
    const double w = p.omega_b(), ws = p.omega_signal();
    const double n2 = p.n_b * p.n_b * p.n_s1 * p.n_s1 * p.n_s2 * p.n_s2;
    const double l3 = p.length * p.length * p.length;
    return 2.0 * p.d_eff * std::sqrt(kHbar * w * ws * ws / (2.0 * kEpsilon0 * l3 * n2)) * phi_overlap;
}

inline double tau_physical(double kappa, double pulse_duration) {
    if (!(kappa > 0.0)) throw NonPositiveParameter("tau_physical: kappa must be > 0");
    if (!(pulse_duration >= 0.0)) throw NonPositiveParameter("tau_physical: pulse duration must be >= 0");
    return kappa * pulse_duration;
}

// ---------------------------------------------------------------------------
// Quantities with units, e.g. "30pm/V", "1 mm", "775nm", "20um", "1ns"
// ---------------------------------------------------------------------------

enum class Dimension { Length, Time, Nonlinearity, Wavenumber, Dimensionless };

inline double parse_quantity(std::string_view text, Dimension dim) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("parse_quantity: no number in '" + std::string(text) + "'");
    }
    std::string unit = s.substr(used);
    // accept the micro sign (UTF-8) and the Greek mu as 'u'
    for (const char* micro : {"\xC2\xB5", "\xCE\xBC"}) {
        const auto pos = unit.find(micro);
        if (pos != std::string::npos) unit.replace(pos, 2, "u");
    }
    struct Unit {
        const char* name;
        double scale;
    };
    static const std::vector<std::pair<Dimension, std::vector<Unit>>> table = {
        {Dimension::Length, {{"", 1.0}, {"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}, {"pm", 1e-12}}},
        {Dimension::Time, {{"", 1.0}, {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}}},
        {Dimension::Nonlinearity, {{"", 1.0}, {"m/V", 1.0}, {"pm/V", 1e-12}}},
        {Dimension::Wavenumber, {{"", 1.0}, {"1/m", 1.0}, {"/m", 1.0}, {"1/mm", 1e3}, {"1/um", 1e6}}},
        {Dimension::Dimensionless, {{"", 1.0}}},
    };
    for (const auto& [d, units] : table) {
        if (d != dim) continue;
        for (const auto& u : units)
            if (unit == u.name) return value * u.scale;
    }
    throw ValidationError("parse_quantity: unsupported unit '" + unit + "' in '" + std::string(text) + "'");
}

}  // namespace trilinear::physical
