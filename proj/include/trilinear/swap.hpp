// swap.hpp — signal beamsplitting, the transformed interaction, and SH-mode heralding
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "entanglement.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "parallel.hpp"
#include "skew_tridiagonal.hpp"
#include "state.hpp"

namespace trilinear {

// ---------------------------------------------------------------------------
// Beamsplitter B = exp((theta/2)(a1^dag a2 - a2^dag a1))
// ---------------------------------------------------------------------------
//
// On the N-photon subspace with basis |k, N-k> the generator is skew
// tridiagonal with sub-diagonal sqrt((k+1)(N-k)). Creation operators map as
//     a1^dag -> cos(theta/2) a1^dag - sin(theta/2) a2^dag,
//     a2^dag -> sin(theta/2) a1^dag + cos(theta/2) a2^dag,
// so theta = pi/2 is the balanced splitter.

// Reflectivity for the rotation matrix above.
inline double reflectivity(double theta) {
    const double s = std::sin(theta / 2.0);
    return s * s;
}

// Alternative reading with R = sin^2(theta/4); under it the balanced point
// moves to theta = pi, and theta = pi/2 gives R = sin^2(pi/8).
inline double reflectivity_quarter_angle(double theta) {
    const double s = std::sin(theta / 4.0);
    return s * s;
}

inline double theta_for_reflectivity(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("theta_for_reflectivity: R must lie in [0, 1]");
    return 2.0 * std::asin(std::sqrt(r));
}

inline double theta_for_reflectivity_quarter_angle(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("theta_for_reflectivity_quarter_angle: R must lie in [0, 1]");
    return 4.0 * std::asin(std::sqrt(r));
}

class Beamsplitter {
public:
    explicit Beamsplitter(double theta) : theta_(theta) {}

    double theta() const { return theta_; }

    // Amplitudes of B|k, N-k> over |j, N-j>, j = 0..N.
    Eigen::VectorXd column(int total, int k) const {
        const auto& u = unitary(total);
        return u.col(k);
    }

    const Eigen::MatrixXd& unitary(int total) const {
        if (total < 0) throw ValidationError("Beamsplitter: negative photon number");
        std::lock_guard lock(mutex_);
        auto it = cache_.find(total);
        if (it != cache_.end()) return it->second;
        std::vector<double> lower;
        for (int k = 0; k < total; ++k) lower.push_back(std::sqrt(double(k + 1) * (total - k)));
        return cache_.emplace(total, SkewTridiagonalExp(lower).matrix(theta_ / 2.0)).first->second;
    }

    // Acts on modes a (first) and b (second) of a sparse state.
    FockState apply(const FockState& psi, Mode a = Mode::S1, Mode b = Mode::S2) const {
        if (a == b) throw InvalidSubsystem("Beamsplitter: the two modes must differ");
        const int ia = index_of(a), ib = index_of(b);
        std::vector<FockState::Term> out;
        for (const auto& [occ, amp] : psi.terms()) {
            const int total = occ[ia] + occ[ib];
            const auto& u = unitary(total);
            for (int j = 0; j <= total; ++j) {
                const double v = u(j, occ[ia]);
                if (v == 0.0) continue;
                Occupation o = occ;
                o[ia] = j;
                o[ib] = total - j;
                out.emplace_back(o, amp * v);
            }
        }
        return FockState(std::move(out));
    }

private:
    double theta_;
    mutable std::mutex mutex_;
    mutable std::map<int, Eigen::MatrixXd> cache_;
};

// Mixes the two signal modes of the input state, which must not have
// interacted yet.
inline FockState apply_beamsplitter(const SystemState& state, double theta) {
    if (state.tau() != 0.0) {
        throw ValidationError("apply_beamsplitter: the signals are mixed before the interaction (state tau must be 0)");
    }
    return Beamsplitter(theta).apply(state.to_fock());
}

// ---------------------------------------------------------------------------
// Evolution under the transformed generator
// ---------------------------------------------------------------------------

// exp(tau H')|Psi(0)> with H' = (1/2)[(a2^2 - a1^2) b^dag + (a1^dag^2 - a2^dag^2) b],
// the trilinear generator seen through a balanced splitter on the signals.
class TransformedEvolver {
public:
    TransformedEvolver(int n_max1, int n_max2, ExpmOptions opt = {})
        : h_(std::make_shared<const SparseHamiltonian>(
              build_sparse_hamiltonian(HamiltonianKind::Transformed, n_max1, n_max2))),
          opt_(opt) {}

    const SparseHamiltonian& hamiltonian() const { return *h_; }

    FockState evolve(const SystemState& initial, double tau, unsigned workers = 1) const {
        if (initial.tau() != 0.0) throw ValidationError("TransformedEvolver: input must be the initial state");
        const SparsePropagator prop(h_, tau, opt_);
        const int n1 = initial.n_max1(), n2 = initial.n_max2();
        std::vector<std::vector<FockState::Term>> parts(static_cast<std::size_t>((n1 + 1) * (n2 + 1)));
        parallel_for(parts.size(), workers, [&](std::size_t k) {
            const int n = static_cast<int>(k) / (n2 + 1), np = static_cast<int>(k) % (n2 + 1);
            const cplx w = initial.weight(n, np);
            if (w == cplx{}) return;
            const int idx = h_->index_of({n, np, 0});
            if (idx < 0) throw ValidationError("TransformedEvolver: initial ket outside the truncated basis");
            const Eigen::VectorXcd out = prop.apply_basis(idx);
            const auto& comp = h_->components()[static_cast<std::size_t>(h_->component_of(idx))];
            for (std::size_t q = 0; q < comp.size(); ++q) {
                const cplx a = w * out(static_cast<Eigen::Index>(q));
                if (a == cplx{}) continue;
                const Ket3& ket = h_->basis()[static_cast<std::size_t>(comp[q])];
                Occupation o{};
                o[index_of(Mode::S1)] = ket[0];
                o[index_of(Mode::S2)] = ket[1];
                o[index_of(Mode::B)] = ket[2];
                o[index_of(Mode::I1)] = n;
                o[index_of(Mode::I2)] = np;
                parts[k].emplace_back(o, a);
            }
        });
        std::vector<FockState::Term> all;
        for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
        return FockState(std::move(all));
    }

private:
    std::shared_ptr<const SparseHamiltonian> h_;
    ExpmOptions opt_;
};

// ---------------------------------------------------------------------------
// Heralding on the SH mode
// ---------------------------------------------------------------------------

enum class Projector { Click, OnePNR };

inline std::string to_string(Projector p) { return p == Projector::Click ? "click" : "1pnr"; }

inline bool projector_accepts(Projector p, int n_b) { return p == Projector::Click ? n_b >= 1 : n_b == 1; }

inline constexpr double kMinHeraldProbability = 1e-14;

struct HeraldOutcome {
    Projector projector;
    double probability;
    DensityMatrix post_state;  // over {i1, i2}, unit trace
};

inline double herald_probability(const FockState& psi, Projector p) {
    const double total = psi.norm_squared();
    double acc = 0.0;
    for (const auto& [occ, a] : psi.terms())
        if (projector_accepts(p, occ[index_of(Mode::B)])) acc += std::norm(a);
    return acc / total;
}

inline HeraldOutcome herald(const FockState& psi, Projector p) {
    const double prob = herald_probability(psi, p);
    if (!(prob >= kMinHeraldProbability)) {
        throw ZeroProbability("herald: " + to_string(p) + " outcome has probability " + std::to_string(prob));
    }
    const FockState kept = psi.filtered([&](const Occupation& o) { return projector_accepts(p, o[index_of(Mode::B)]); });
    return {p, prob, partial_trace(kept, ModeSet{Mode::I1, Mode::I2})};
}

inline HeraldOutcome herald(const SystemState& state, Projector p) { return herald(state.to_fock(), p); }

inline NegativityReport heralded_idler_negativity(const HeraldOutcome& h) {
    return negativity_report(h.post_state, ModeSet{Mode::I2});
}

struct SwapRow {
    double tau;
    double log_neg_click;
    double log_neg_1pnr;
    double prob_click;
    double prob_1pnr;
};

struct SwapOptions {
    TruncationSpec truncation = TruncationSpec::automatic(1e-8, 80);
    unsigned workers = 1;
    ExpmOptions expm;
};

inline std::vector<SwapRow> swap_experiment(double n_bar_1, double n_bar_2, const std::vector<double>& tau_grid,
                                            const SwapOptions& opt = {}) {
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1])) throw ValidationError("swap_experiment: tau grid must be increasing");
    const SystemState init = build_initial_state(n_bar_1, n_bar_2, opt.truncation);
    const TransformedEvolver ev(init.n_max1(), init.n_max2(), opt.expm);
    std::vector<SwapRow> rows;
    for (double tau : tau_grid) {
        SwapRow row{tau, 0.0, 0.0, 0.0, 0.0};
        if (tau != 0.0) {
            const FockState psi = ev.evolve(init, tau, opt.workers);
            row.prob_click = herald_probability(psi, Projector::Click);
            row.prob_1pnr = herald_probability(psi, Projector::OnePNR);
            if (row.prob_click >= kMinHeraldProbability)
                row.log_neg_click = heralded_idler_negativity(herald(psi, Projector::Click)).log_negativity;
            if (row.prob_1pnr >= kMinHeraldProbability)
                row.log_neg_1pnr = heralded_idler_negativity(herald(psi, Projector::OnePNR)).log_negativity;
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<SwapRow> swap_experiment(double n_bar_s, const std::vector<double>& tau_grid, const SwapOptions& opt = {}) {
    return swap_experiment(n_bar_s, n_bar_s, tau_grid, opt);
}

}  // namespace trilinear
