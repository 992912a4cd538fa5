// perturbation.hpp — short-time series of the evolved state in idler corrections
//
// The order-k term of exp(tau H)|Psi(0)> is written as
//     sum_{n,n',m} |Phi^(k)_{n,n',m}>_{i1 i2} |n, n', m>_{s1 s2 b},
// with (n, n', m) the signal and SH occupations and Phi^(k) a vector over idler
// pairs. Starting from Phi^(0)_{n,n',m} = C_{n,n',m}|n, n'>, each order follows
//     Phi^(k+1)_{n,n',m} = sqrt((n+1)(n'+1)m) Phi^(k)_{n+1,n'+1,m-1}
//                        - sqrt(n n'(m+1))   Phi^(k)_{n-1,n'-1,m+1}.
#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "entanglement.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "modes.hpp"

namespace trilinear {

// C_{n,n',m} = c1_n c2_n' lambda_m: the two TMSVS amplitudes and the SH seed.
class InitialCoefficients {
public:
    InitialCoefficients(const SqueezeParams& p1, const SqueezeParams& p2, const TruncationSpec& trunc,
                        std::vector<cplx> sh_seed = {cplx(1.0)})
        : lambda_(std::move(sh_seed)) {
        if (lambda_.empty()) throw ValidationError("InitialCoefficients: SH seed must have at least one amplitude");
        const int n1 = resolve_cutoff(p1, trunc), n2 = resolve_cutoff(p2, trunc);
        for (int n = 0; n <= n1; ++n) c1_.push_back(tmsvs_coefficient(p1, n));
        for (int n = 0; n <= n2; ++n) c2_.push_back(tmsvs_coefficient(p2, n));
    }

    InitialCoefficients(std::vector<cplx> c1, std::vector<cplx> c2, std::vector<cplx> sh_seed)
        : c1_(std::move(c1)), c2_(std::move(c2)), lambda_(std::move(sh_seed)) {
        if (c1_.empty() || c2_.empty() || lambda_.empty()) throw ValidationError("InitialCoefficients: empty amplitude list");
    }

    int n_max1() const { return static_cast<int>(c1_.size()) - 1; }
    int n_max2() const { return static_cast<int>(c2_.size()) - 1; }
    int seed_max() const { return static_cast<int>(lambda_.size()) - 1; }

    cplx operator()(int n, int n_prime, int m) const {
        if (n < 0 || n_prime < 0 || m < 0 || n > n_max1() || n_prime > n_max2() || m > seed_max()) return {};
        return c1_[n] * c2_[n_prime] * lambda_[m];
    }

private:
    std::vector<cplx> c1_, c2_, lambda_;
};

struct CorrectionAB {
    cplx a;  // coefficient of |n+1, n'+1>_i
    cplx b;  // coefficient of |n-1, n'-1>_i
};

inline CorrectionAB correction_AB(int n, int n_prime, int m, const InitialCoefficients& c) {
    if (n < 0 || n_prime < 0 || m < 0) return {};
    const double up = std::sqrt(double(n + 1) * (n_prime + 1) * m);
    const double down = std::sqrt(double(n) * n_prime * (m + 1));
    return {up * c(n + 1, n_prime + 1, m - 1), -down * c(n - 1, n_prime - 1, m + 1)};
}

inline constexpr int kDefaultMaxOrder = 4;

// Phi^(k) for every label (n, n', m) inside the box n <= N1 + S, n' <= N2 + S,
// m <= M (S the seed cutoff, M = S + min(N1, N2)); entries are idler shifts d in [-k, k]
// relative to |n, n'>, i.e. the idler ket |n+d, n'+d>.
class IdlerCorrection {
public:
    IdlerCorrection(int order, int n_max1, int n_max2, int m_max)
        : order_(order), n1_(n_max1), n2_(n_max2), m_max_(m_max),
          data_(static_cast<std::size_t>((n_max1 + 1) * (n_max2 + 1) * (m_max + 1) * (2 * order + 1))) {}

    static IdlerCorrection zeroth(const InitialCoefficients& c) {
        // with SH quanta in the seed, down-conversion lifts the signals above the TMSVS cutoffs
        const int m_max = c.seed_max() + std::min(c.n_max1(), c.n_max2());
        IdlerCorrection phi(0, c.n_max1() + c.seed_max(), c.n_max2() + c.seed_max(), m_max);
        for (int n = 0; n <= c.n_max1(); ++n)
            for (int np = 0; np <= c.n_max2(); ++np)
                for (int m = 0; m <= c.seed_max(); ++m) phi.at(n, np, m, 0) = c(n, np, m);
        return phi;
    }

    int order() const { return order_; }
    int n_max1() const { return n1_; }
    int n_max2() const { return n2_; }
    int m_max() const { return m_max_; }

    bool in_box(int n, int n_prime, int m) const {
        return n >= 0 && n_prime >= 0 && m >= 0 && n <= n1_ && n_prime <= n2_ && m <= m_max_;
    }

    // Coefficient of |n+d, n'+d>_i in Phi_{n,n',m}; zero outside the stored range.
    cplx get(int n, int n_prime, int m, int d) const {
        if (!in_box(n, n_prime, m) || d < -order_ || d > order_) return {};
        return data_[offset(n, n_prime, m, d)];
    }

    cplx& at(int n, int n_prime, int m, int d) { return data_[offset(n, n_prime, m, d)]; }

private:
    std::size_t offset(int n, int n_prime, int m, int d) const {
        return ((static_cast<std::size_t>(n) * (n2_ + 1) + n_prime) * (m_max_ + 1) + m) * (2 * order_ + 1) +
               static_cast<std::size_t>(d + order_);
    }

    int order_, n1_, n2_, m_max_;
    std::vector<cplx> data_;
};

inline IdlerCorrection correction_recursive(const IdlerCorrection& prev, int max_order = kDefaultMaxOrder) {
    const int k = prev.order() + 1;
    if (k > max_order) {
        throw OrderCeiling("correction_recursive: order " + std::to_string(k) + " exceeds the configured maximum " +
                           std::to_string(max_order));
    }
    IdlerCorrection next(k, prev.n_max1(), prev.n_max2(), prev.m_max());
    for (int n = 0; n <= prev.n_max1(); ++n) {
        for (int np = 0; np <= prev.n_max2(); ++np) {
            for (int m = 0; m <= prev.m_max(); ++m) {
                const double up = std::sqrt(double(n + 1) * (np + 1) * m);
                const double down = std::sqrt(double(n) * np * (m + 1));
                for (int d = -k; d <= k; ++d) {
                    cplx v{};
                    if (m > 0) v += up * prev.get(n + 1, np + 1, m - 1, d - 1);
                    if (n > 0 && np > 0) v -= down * prev.get(n - 1, np - 1, m + 1, d + 1);
                    next.at(n, np, m, d) = v;
                }
            }
        }
    }
    return next;
}

// Phi^(0) .. Phi^(order).
inline std::vector<IdlerCorrection> correction_series(const InitialCoefficients& c, int order,
                                                      int max_order = kDefaultMaxOrder) {
    if (order < 0) throw ValidationError("correction_series: order must be >= 0");
    if (order > max_order) {
        throw OrderCeiling("correction_series: order " + std::to_string(order) + " exceeds the configured maximum " +
                           std::to_string(max_order));
    }
    std::vector<IdlerCorrection> out{IdlerCorrection::zeroth(c)};
    for (int k = 1; k <= order; ++k) out.push_back(correction_recursive(out.back(), max_order));
    return out;
}

// Five-mode sparse form of one correction.
inline FockState correction_state(const IdlerCorrection& phi) {
    std::vector<FockState::Term> terms;
    for (int n = 0; n <= phi.n_max1(); ++n)
        for (int np = 0; np <= phi.n_max2(); ++np)
            for (int m = 0; m <= phi.m_max(); ++m)
                for (int d = -phi.order(); d <= phi.order(); ++d) {
                    const cplx v = phi.get(n, np, m, d);
                    if (v == cplx{}) continue;
                    Occupation o{};
                    o[index_of(Mode::S1)] = n;
                    o[index_of(Mode::S2)] = np;
                    o[index_of(Mode::B)] = m;
                    o[index_of(Mode::I1)] = n + d;
                    o[index_of(Mode::I2)] = np + d;
                    terms.emplace_back(o, v);
                }
    return FockState(std::move(terms));
}

// sum_{k <= order} tau^k / k! H^k |Psi(0)>, unnormalized.
inline FockState perturbative_state(const InitialCoefficients& c, double tau, int order, int max_order = kDefaultMaxOrder) {
    const auto series = correction_series(c, order, max_order);
    FockState out;
    double factor = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) factor *= tau / k;
        out = out.plus(correction_state(series[static_cast<std::size_t>(k)]).scaled(factor));
    }
    return out;
}

// ---------------------------------------------------------------------------
// First-order partially transposed i1 i2 b matrix
// ---------------------------------------------------------------------------

// Coefficients of the first-order matrix. Indices follow the idler ket they
// multiply; A and B carry the signal label of the term they came from.
class FirstOrderCoefficients {
public:
    explicit FirstOrderCoefficients(InitialCoefficients c) : c_(std::move(c)) {}

    const InitialCoefficients& initial() const { return c_; }
    CorrectionAB ab(int n, int n_prime, int m) const { return correction_AB(n, n_prime, m, c_); }

    // weight of |n, n'><n, n'| (x) |m'><m| at order tau^2
    cplx omega(int n, int n_prime, int m, int mp) const {
        return ab(n - 1, n_prime - 1, m).a * std::conj(ab(n - 1, n_prime - 1, mp).a) +
               ab(n + 1, n_prime + 1, m).b * std::conj(ab(n + 1, n_prime + 1, mp).b);
    }

    // weight of |n+1, n'+1><n, n'| (x) |m'><m| at order tau
    cplx alpha(int n, int n_prime, int m, int mp) const {
        return ab(n, n_prime, m).a * std::conj(c_(n, n_prime, mp)) +
               c_(n + 1, n_prime + 1, m) * std::conj(ab(n + 1, n_prime + 1, mp).b);
    }

    // weight of |n+2, n'+2><n, n'| (x) |m'><m| at order tau^2
    cplx beta(int n, int n_prime, int m, int mp) const {
        return ab(n + 1, n_prime + 1, m).a * std::conj(ab(n + 1, n_prime + 1, mp).b);
    }

    int sh_max() const { return c_.seed_max() + 1; }

private:
    InitialCoefficients c_;
};

struct PerturbativeOptions {
    // Adds (tau^2/2)(|Phi2><Phi0| + |Phi0><Phi2|), which the first-order matrix
    // otherwise leaves out.
    bool include_second_order_cross = false;
};

// Partially transposed (over b) reduced i1 i2 b matrix through first order in
// the state, normalized to unit trace.
inline LabeledMatrix reduced_pt_first_order(const InitialCoefficients& c, double tau, PerturbativeOptions opt = {}) {
    if (!(tau >= 0.0)) throw ValidationError("reduced_pt_first_order: tau must be >= 0");
    const FirstOrderCoefficients k(c);
    const int n1 = c.n_max1(), n2 = c.n_max2(), mm = k.sh_max();
    auto occ = [](int i1, int i2, int b) {
        Occupation o{};
        o[index_of(Mode::I1)] = i1;
        o[index_of(Mode::I2)] = i2;
        o[index_of(Mode::B)] = b;
        return o;
    };
    std::vector<MatrixEntry> entries;
    auto add = [&](const Occupation& ket, const Occupation& bra, cplx v) {
        if (v != cplx{}) entries.push_back({ket, bra, v});
    };
    const double t2 = tau * tau;
    for (int n = 0; n <= n1; ++n) {
        for (int np = 0; np <= n2; ++np) {
            for (int m = 0; m <= mm; ++m) {
                for (int mp = 0; mp <= mm; ++mp) {
                    // ket carries b = m', bra carries b = m (transposed)
                    add(occ(n, np, mp), occ(n, np, m), c(n, np, m) * std::conj(c(n, np, mp)) + t2 * k.omega(n, np, m, mp));
                    if (tau != 0.0) {
                        add(occ(n + 1, np + 1, mp), occ(n, np, m), tau * k.alpha(n, np, m, mp));
                        add(occ(n, np, mp), occ(n + 1, np + 1, m), tau * std::conj(k.alpha(n, np, mp, m)));
                        add(occ(n + 2, np + 2, mp), occ(n, np, m), t2 * k.beta(n, np, m, mp));
                        add(occ(n, np, mp), occ(n + 2, np + 2, m), t2 * std::conj(k.beta(n, np, mp, m)));
                    }
                }
            }
        }
    }
    if (opt.include_second_order_cross && tau != 0.0) {
        const auto series = correction_series(c, 2);
        const auto& phi0 = series[0];
        const auto& phi2 = series[2];
        const double f = 0.5 * t2;
        for (int n = 0; n <= phi2.n_max1(); ++n)
            for (int np = 0; np <= phi2.n_max2(); ++np)
                for (int m = 0; m <= phi2.m_max(); ++m)
                    for (int mp = 0; mp <= phi0.m_max(); ++mp) {
                        const cplx c0 = phi0.get(n, np, mp, 0);
                        if (c0 == cplx{}) continue;
                        for (int d = -2; d <= 2; ++d) {
                            const cplx v = f * phi2.get(n, np, m, d) * std::conj(c0);
                            if (v == cplx{}) continue;
                            // |Phi2_m><Phi0_m'| (x) |m><m'|, transposed on b, and its conjugate
                            add(occ(n + d, np + d, mp), occ(n, np, m), v);
                            add(occ(n, np, m), occ(n + d, np + d, mp), std::conj(v));
                        }
                    }
    }
    Occupation cut{};
    cut[index_of(Mode::I1)] = n1 + 2;
    cut[index_of(Mode::I2)] = n2 + 2;
    cut[index_of(Mode::B)] = std::max(mm, c.seed_max() + std::min(n1, n2));
    ModeSet modes{Mode::I1, Mode::I2, Mode::B};
    return LabeledMatrix::from_entries(modes, cut, entries).normalized();
}

inline std::vector<double> perturbative_log_negativity(const InitialCoefficients& c, const std::vector<double>& tau_grid,
                                                       PerturbativeOptions opt = {}) {
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] < tau_grid[i - 1])) {
            throw ValidationError("perturbative_log_negativity: tau grid must be sorted and nonnegative");
        }
    }
    std::vector<double> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        out.push_back(tau == 0.0 ? 0.0 : negativity_from_spectrum(reduced_pt_first_order(c, tau, opt).eigenvalues()).log_negativity);
    }
    return out;
}

}  // namespace trilinear
