// fock.hpp — two-mode squeezed vacuum states and truncation of their Fock expansion
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include "errors.hpp"

namespace trilinear {

using cplx = std::complex<double>;

// Squeeze magnitude r and pump phase phi of one down-converter.
struct SqueezeParams {
    double r = 0.0;
    double phi = 0.0;

    SqueezeParams() = default;
    SqueezeParams(double r_, double phi_ = 0.0) : r(r_), phi(phi_) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ValidationError("SqueezeParams: r must be finite and >= 0, got " + std::to_string(r));
        }
        if (!std::isfinite(phi)) {
            throw ValidationError("SqueezeParams: phi must be finite");
        }
    }

    static SqueezeParams from_signal_mean(double n_bar_s, double phi = 0.0);

    // z = e^{2i phi} tanh r, |z| < 1.
    cplx z() const { return std::polar(std::tanh(r), 2.0 * phi); }
    double tanh_r() const { return std::tanh(r); }
    double signal_mean() const { return std::sinh(r) * std::sinh(r); }

    friend bool operator==(const SqueezeParams&, const SqueezeParams&) = default;
};

// <n,n|xi> = (1/cosh r) (-1)^n e^{2 i n phi} tanh^n r.
inline cplx tmsvs_coefficient(const SqueezeParams& p, int n) {
    if (n < 0) {
        throw ValidationError("tmsvs_coefficient: n must be >= 0");
    }
    const double mag = std::pow(std::tanh(p.r), n) / std::cosh(p.r);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * std::polar(mag, 2.0 * p.phi * n);
}

// Same amplitude in the (1-|z|^2)^{1/2} z^n form; differs from the stored
// convention by (-1)^n.
inline cplx tmsvs_coefficient_zform(const SqueezeParams& p, int n) {
    if (n < 0) {
        throw ValidationError("tmsvs_coefficient_zform: n must be >= 0");
    }
    const cplx z = p.z();
    return std::sqrt(1.0 - std::norm(z)) * std::pow(z, n);
}

inline double tmsvs_joint_prob(const SqueezeParams& p, int n1, int n2) {
    if (n1 < 0 || n2 < 0) {
        throw ValidationError("tmsvs_joint_prob: photon numbers must be >= 0");
    }
    if (n1 != n2) {
        return 0.0;
    }
    const double c = std::cosh(p.r);
    return std::pow(std::tanh(p.r), 2 * n1) / (c * c);
}

// Total photon number 2 sinh^2 r of the vacuum-seeded TMSVS.
inline double tmsvs_mean_photons(const SqueezeParams& p) {
    const double s = std::sinh(p.r);
    return 2.0 * s * s;
}

inline double squeeze_from_signal_mean(double n_bar_s) {
    if (!(n_bar_s >= 0.0) || !std::isfinite(n_bar_s)) {
        throw ValidationError("squeeze_from_signal_mean: mean photon number must be >= 0, got " +
                              std::to_string(n_bar_s));
    }
    return std::asinh(std::sqrt(n_bar_s));
}

inline SqueezeParams SqueezeParams::from_signal_mean(double n_bar_s, double phi) {
    return SqueezeParams(squeeze_from_signal_mean(n_bar_s), phi);
}

// Probability discarded by keeping n <= n_max: sum_{n > n_max} (1-|z|^2)|z|^{2n} = |z|^{2(n_max+1)}.
inline double tmsvs_tail_mass(const SqueezeParams& p, int n_max) {
    const double t2 = std::tanh(p.r) * std::tanh(p.r);
    return std::pow(t2, n_max + 1);
}

// Per-converter Fock cutoff. With n_max unset the smallest cutoff meeting
// tail_epsilon is chosen; either way a cutoff above `ceiling` is refused.
struct TruncationSpec {
    std::optional<int> n_max;
    double tail_epsilon = 1e-10;
    int ceiling = 40;

    static TruncationSpec automatic(double eps, int ceiling = 40) { return {std::nullopt, eps, ceiling}; }
    static TruncationSpec fixed(int n_max, double eps, int ceiling = 40) { return {n_max, eps, ceiling}; }

    friend bool operator==(const TruncationSpec&, const TruncationSpec&) = default;
};

inline int resolve_cutoff(const SqueezeParams& p, const TruncationSpec& spec) {
    if (!(spec.tail_epsilon > 0.0)) {
        throw ValidationError("TruncationSpec: tail_epsilon must be > 0");
    }
    if (spec.n_max) {
        const int n = *spec.n_max;
        if (n < 0) {
            throw ValidationError("TruncationSpec: n_max must be >= 0");
        }
        if (n > spec.ceiling) {
            throw TruncationTooTight("n_max=" + std::to_string(n) + " exceeds the cutoff ceiling " +
                                     std::to_string(spec.ceiling));
        }
        const double tail = tmsvs_tail_mass(p, n);
        if (tail > spec.tail_epsilon) {
            throw TruncationTooTight("n_max=" + std::to_string(n) + " discards probability " + std::to_string(tail) +
                                     " > tail_epsilon=" + std::to_string(spec.tail_epsilon) +
                                     " for r=" + std::to_string(p.r));
        }
        return n;
    }
    const double t2 = std::tanh(p.r) * std::tanh(p.r);
    if (t2 == 0.0) {
        return 0;
    }
    // |z|^{2(N+1)} <= eps  <=>  N + 1 >= log(eps) / log(t2)
    int n = static_cast<int>(std::ceil(std::log(spec.tail_epsilon) / std::log(t2))) - 1;
    n = std::max(n, 0);
    // guard the floor against rounding in the logarithms
    while (n > 0 && tmsvs_tail_mass(p, n - 1) <= spec.tail_epsilon) --n;
    while (tmsvs_tail_mass(p, n) > spec.tail_epsilon) ++n;
    if (n > spec.ceiling) {
        throw TruncationTooTight("tail_epsilon=" + std::to_string(spec.tail_epsilon) + " at mean photon number " +
                                 std::to_string(p.signal_mean()) + " needs n_max=" + std::to_string(n) +
                                 " above the ceiling " + std::to_string(spec.ceiling));
    }
    return n;
}

}  // namespace trilinear
