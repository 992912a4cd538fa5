// state.hpp — sector-decomposed five-mode state of twin TMSVS driving the trilinear interaction
//
// Each pair of idler occupations (n, n') labels a sector. Inside it the
// interacting modes live on the ladder |n-j, n'-j, j>_{s1,s2,b}, j = 0..min(n,n').
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <complex>
#include <vector>

#include "fock.hpp"
#include "modes.hpp"

namespace trilinear {

struct SectorLabel {
    int n = 0;
    int n_prime = 0;

    int ladder_dim() const { return std::min(n, n_prime) + 1; }
    friend auto operator<=>(const SectorLabel&, const SectorLabel&) = default;
};

struct SectorState {
    SectorLabel label;
    Eigen::VectorXcd amplitudes;  // indexed by ladder index j
};

class SystemState {
public:
    SystemState() = default;

    SystemState(SqueezeParams p1, SqueezeParams p2, int n_max1, int n_max2, std::vector<cplx> weights,
                std::vector<SectorState> sectors, double tau)
        : p1_(p1), p2_(p2), n_max1_(n_max1), n_max2_(n_max2), tau_(tau), weights_(std::move(weights)),
          sectors_(std::move(sectors)) {}

    const SqueezeParams& params1() const { return p1_; }
    const SqueezeParams& params2() const { return p2_; }
    int n_max1() const { return n_max1_; }
    int n_max2() const { return n_max2_; }
    // Largest reachable SH occupation.
    int sh_max() const { return std::min(n_max1_, n_max2_); }
    double tau() const { return tau_; }

    std::size_t sector_index(int n, int n_prime) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_max2_ + 1) + static_cast<std::size_t>(n_prime);
    }
    const SectorState& sector(int n, int n_prime) const { return sectors_[sector_index(n, n_prime)]; }
    cplx weight(int n, int n_prime) const { return weights_[sector_index(n, n_prime)]; }
    const std::vector<SectorState>& sectors() const { return sectors_; }
    const std::vector<cplx>& weights() const { return weights_; }

    // Full amplitude of |n-j, n'-j, j>_{s1 s2 b} |n, n'>_{i1 i2}; zero outside the ladder.
    cplx amplitude(int n, int n_prime, int j) const {
        if (n < 0 || n_prime < 0 || n > n_max1_ || n_prime > n_max2_ || j < 0 || j > std::min(n, n_prime)) return {};
        return weight(n, n_prime) * sector(n, n_prime).amplitudes(j);
    }

    double norm_squared() const {
        double s = 0.0;
        for (std::size_t k = 0; k < sectors_.size(); ++k) s += std::norm(weights_[k]) * sectors_[k].amplitudes.squaredNorm();
        return s;
    }

    // True when every weight and amplitude has zero imaginary part.
    bool is_real() const {
        for (const auto& w : weights_)
            if (w.imag() != 0.0) return false;
        for (const auto& s : sectors_)
            if (!s.amplitudes.imag().isZero(0.0)) return false;
        return true;
    }

    SystemState with_sectors(std::vector<SectorState> sectors, double tau) const {
        return SystemState(p1_, p2_, n_max1_, n_max2_, weights_, std::move(sectors), tau);
    }

    FockState to_fock() const {
        std::vector<FockState::Term> terms;
        for (const auto& s : sectors_) {
            const cplx w = weight(s.label.n, s.label.n_prime);
            for (Eigen::Index j = 0; j < s.amplitudes.size(); ++j) {
                const cplx a = w * s.amplitudes(j);
                if (a == cplx{}) continue;
                const int jj = static_cast<int>(j);
                Occupation occ{};
                occ[index_of(Mode::S1)] = s.label.n - jj;
                occ[index_of(Mode::S2)] = s.label.n_prime - jj;
                occ[index_of(Mode::B)] = jj;
                occ[index_of(Mode::I1)] = s.label.n;
                occ[index_of(Mode::I2)] = s.label.n_prime;
                terms.emplace_back(occ, a);
            }
        }
        return FockState(std::move(terms));
    }

private:
    SqueezeParams p1_, p2_;
    int n_max1_ = 0, n_max2_ = 0;
    double tau_ = 0.0;
    std::vector<cplx> weights_;
    std::vector<SectorState> sectors_;
};

// |xi_1>_{s1 i1} |xi_2>_{s2 i2} |0>_b with each TMSVS truncated per `trunc`.
inline SystemState build_initial_state(const SqueezeParams& p1, const SqueezeParams& p2, const TruncationSpec& trunc) {
    const int n1 = resolve_cutoff(p1, trunc);
    const int n2 = resolve_cutoff(p2, trunc);
    std::vector<cplx> c1(n1 + 1), c2(n2 + 1);
    for (int n = 0; n <= n1; ++n) c1[n] = tmsvs_coefficient(p1, n);
    for (int n = 0; n <= n2; ++n) c2[n] = tmsvs_coefficient(p2, n);

    std::vector<cplx> weights;
    std::vector<SectorState> sectors;
    weights.reserve(static_cast<std::size_t>((n1 + 1) * (n2 + 1)));
    sectors.reserve(weights.capacity());
    for (int n = 0; n <= n1; ++n) {
        for (int np = 0; np <= n2; ++np) {
            SectorLabel label{n, np};
            Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(label.ladder_dim());
            amps(0) = 1.0;
            weights.push_back(c1[n] * c2[np]);
            sectors.push_back({label, std::move(amps)});
        }
    }
    return SystemState(p1, p2, n1, n2, std::move(weights), std::move(sectors), 0.0);
}

inline SystemState build_initial_state(double n_bar_1, double n_bar_2, const TruncationSpec& trunc) {
    return build_initial_state(SqueezeParams::from_signal_mean(n_bar_1), SqueezeParams::from_signal_mean(n_bar_2), trunc);
}

}  // namespace trilinear
