// dynamics.hpp — evolution under the trilinear generator and its beamsplit variant
//
// Everything here works with the real antisymmetric generator
//     H = a1 a2 b^dag - a1^dag a2^dag b,      U(tau) = exp(tau H),
// i.e. the interaction Hamiltonian divided by i hbar kappa. Its Fock-basis
// elements are real, so i H is the Hermitian matrix.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "parallel.hpp"
#include "skew_tridiagonal.hpp"
#include "state.hpp"

namespace trilinear {

// ---------------------------------------------------------------------------
// Sector ladders
// ---------------------------------------------------------------------------

// Sub-diagonal of the ladder generator: G(j+1, j) = sqrt((n-j)(n'-j)(j+1)).
inline std::vector<double> sector_ladder(const SectorLabel& label) {
    const int d = label.ladder_dim();
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(std::max(d - 1, 0)));
    for (int j = 0; j + 1 < d; ++j) {
        g.push_back(std::sqrt(static_cast<double>(label.n - j) * (label.n_prime - j) * (j + 1)));
    }
    return g;
}

inline Eigen::MatrixXd sector_generator(const SectorLabel& label) {
    if (label.n < 0 || label.n_prime < 0) throw ValidationError("sector_generator: negative sector label");
    const int d = label.ladder_dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    const auto lower = sector_ladder(label);
    for (int j = 0; j + 1 < d; ++j) {
        g(j + 1, j) = lower[j];
        g(j, j + 1) = -lower[j];
    }
    return g;
}

// Holds the diagonalized ladder of every sector up to the cutoffs. Built once
// and reused for any number of tau values; it does not depend on squeezing.
class TrilinearEvolver {
public:
    TrilinearEvolver(int n_max1, int n_max2) : n_max1_(n_max1), n_max2_(n_max2) {
        if (n_max1 < 0 || n_max2 < 0) throw ValidationError("TrilinearEvolver: negative cutoff");
        const int lo = std::min(n_max1, n_max2), hi = std::max(n_max1, n_max2);
        // the ladder of (n, n') equals that of (n', n); index by (min, max)
        ladders_.resize(static_cast<std::size_t>((lo + 1) * (hi + 1)));
        for (int a = 0; a <= lo; ++a)
            for (int b = a; b <= hi; ++b) ladders_[key(a, b)] = SkewTridiagonalExp(sector_ladder({a, b}));
    }

    explicit TrilinearEvolver(const SystemState& s) : TrilinearEvolver(s.n_max1(), s.n_max2()) {}

    int n_max1() const { return n_max1_; }
    int n_max2() const { return n_max2_; }

    const SkewTridiagonalExp& ladder(int n, int n_prime) const {
        return ladders_[key(std::min(n, n_prime), std::max(n, n_prime))];
    }

    // exp(tau G) on every sector. The result is tagged with the accumulated time.
    SystemState evolve(const SystemState& state, double tau, unsigned workers = 1) const {
        if (state.n_max1() > n_max1_ || state.n_max2() > n_max2_) {
            throw ValidationError("TrilinearEvolver: state cutoffs exceed the evolver's");
        }
        if (!std::isfinite(tau)) throw ValidationError("evolve: tau must be finite");
        std::vector<SectorState> out(state.sectors().size());
        parallel_for(out.size(), workers, [&](std::size_t k) {
            const SectorState& s = state.sectors()[k];
            out[k].label = s.label;
            out[k].amplitudes = tau == 0.0 ? s.amplitudes : ladder(s.label.n, s.label.n_prime).apply(s.amplitudes, tau);
        });
        return state.with_sectors(std::move(out), state.tau() + tau);
    }

private:
    std::size_t key(int lo, int hi) const {
        const int span = std::max(n_max1_, n_max2_) + 1;
        return static_cast<std::size_t>(lo) * static_cast<std::size_t>(span) + static_cast<std::size_t>(hi);
    }

    int n_max1_, n_max2_;
    std::vector<SkewTridiagonalExp> ladders_;
};

inline SystemState evolve(const SystemState& state, double tau) {
    return TrilinearEvolver(state).evolve(state, tau);
}

// ---------------------------------------------------------------------------
// Sparse generators on an enumerated (s1, s2, b) basis
// ---------------------------------------------------------------------------

enum class HamiltonianKind { Trilinear, Transformed };

inline std::string to_string(HamiltonianKind k) {
    return k == HamiltonianKind::Trilinear ? "trilinear" : "transformed";
}

using Ket3 = std::array<int, 3>;  // (n_s1, n_s2, n_b)

struct SparseEntry {
    int row;
    int col;
    double value;
};

// Real antisymmetric generator H on a truncated basis closed under H, with
// the basis in lexicographic (n_s1, n_s2, n_b) order.
class SparseHamiltonian {
public:
    SparseHamiltonian(HamiltonianKind kind, std::vector<Ket3> basis, std::vector<SparseEntry> entries)
        : kind_(kind), basis_(std::move(basis)), entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return std::pair(a.row, a.col) < std::pair(b.row, b.col); });
        find_components();
    }

    HamiltonianKind kind() const { return kind_; }
    int dimension() const { return static_cast<int>(basis_.size()); }
    const std::vector<Ket3>& basis() const { return basis_; }
    const std::vector<SparseEntry>& entries() const { return entries_; }

    // Index of a basis ket, or -1 when it lies outside the truncation.
    int index_of(const Ket3& ket) const {
        auto it = std::lower_bound(basis_.begin(), basis_.end(), ket);
        return (it != basis_.end() && *it == ket) ? static_cast<int>(it - basis_.begin()) : -1;
    }

    double element(int row, int col) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair(row, col),
                                   [](const SparseEntry& e, const std::pair<int, int>& rc) {
                                       return std::pair(e.row, e.col) < rc;
                                   });
        return (it != entries_.end() && it->row == row && it->col == col) ? it->value : 0.0;
    }

    Eigen::SparseMatrix<double> matrix() const {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(entries_.size());
        for (const auto& e : entries_) t.emplace_back(e.row, e.col, e.value);
        Eigen::SparseMatrix<double> m(dimension(), dimension());
        m.setFromTriplets(t.begin(), t.end());
        return m;
    }

    // Connected components of the coupling graph; each is an invariant subspace.
    const std::vector<std::vector<int>>& components() const { return components_; }
    int component_of(int index) const { return component_id_[static_cast<std::size_t>(index)]; }
    int local_index(int index) const { return local_index_[static_cast<std::size_t>(index)]; }

    // Generator restricted to one component, in component-local indices.
    Eigen::SparseMatrix<double> component_matrix(int c) const {
        const auto& idx = components_[static_cast<std::size_t>(c)];
        std::vector<Eigen::Triplet<double>> t;
        for (int i : idx) {
            auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                                       [](const SparseEntry& e, int row) { return e.row < row; });
            for (; it != entries_.end() && it->row == i; ++it) t.emplace_back(local_index(i), local_index(it->col), it->value);
        }
        const auto d = static_cast<Eigen::Index>(idx.size());
        Eigen::SparseMatrix<double> m(d, d);
        m.setFromTriplets(t.begin(), t.end());
        return m;
    }

private:
    void find_components() {
        const std::size_t n = basis_.size();
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : entries_) {
            const int a = find(e.row), b = find(e.col);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
        component_id_.assign(n, -1);
        local_index_.assign(n, -1);
        std::vector<int> root_to_comp(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const int r = find(static_cast<int>(i));
            if (root_to_comp[r] < 0) {
                root_to_comp[r] = static_cast<int>(components_.size());
                components_.emplace_back();
            }
            auto& comp = components_[static_cast<std::size_t>(root_to_comp[r])];
            component_id_[i] = root_to_comp[r];
            local_index_[i] = static_cast<int>(comp.size());
            comp.push_back(static_cast<int>(i));
        }
    }

    HamiltonianKind kind_;
    std::vector<Ket3> basis_;
    std::vector<SparseEntry> entries_;
    std::vector<std::vector<int>> components_;
    std::vector<int> component_id_;
    std::vector<int> local_index_;
};

inline constexpr std::size_t kDefaultMaxBasis = 4'000'000;

// Trilinear basis: n_s1 + n_b <= N1, n_s2 + n_b <= N2 (both conserved).
// Transformed basis: n_s1 + n_s2 + 2 n_b <= N1 + N2 (conserved).
inline std::vector<Ket3> truncated_basis(HamiltonianKind kind, int n_max1, int n_max2,
                                         std::size_t max_dim = kDefaultMaxBasis) {
    if (n_max1 < 0 || n_max2 < 0) throw ValidationError("truncated_basis: negative cutoff");
    std::vector<Ket3> basis;
    auto push = [&](int s1, int s2, int b) {
        if (basis.size() >= max_dim) {
            throw BasisOverflow(to_string(kind) + " basis at cutoffs (" + std::to_string(n_max1) + ", " +
                                std::to_string(n_max2) + ") exceeds the limit of " + std::to_string(max_dim) + " states");
        }
        basis.push_back({s1, s2, b});
    };
    if (kind == HamiltonianKind::Trilinear) {
        for (int s1 = 0; s1 <= n_max1; ++s1)
            for (int s2 = 0; s2 <= n_max2; ++s2)
                for (int b = 0; s1 + b <= n_max1 && s2 + b <= n_max2; ++b) push(s1, s2, b);
    } else {
        const int total = n_max1 + n_max2;
        for (int s1 = 0; s1 <= total; ++s1)
            for (int s2 = 0; s1 + s2 <= total; ++s2)
                for (int b = 0; s1 + s2 + 2 * b <= total; ++b) push(s1, s2, b);
    }
    return basis;
}

namespace detail {

inline double sqrtd(double x) { return std::sqrt(x); }

// Adds the matrix of coef * (a_s^2 b^dag - a_s^dag^2 b) for signal slot s (0 or 1).
inline void add_degenerate_shg(const std::vector<Ket3>& basis, int s, double coef, std::map<std::pair<int, int>, double>& acc) {
    auto index = [&](const Ket3& k) {
        auto it = std::lower_bound(basis.begin(), basis.end(), k);
        return (it != basis.end() && *it == k) ? static_cast<int>(it - basis.begin()) : -1;
    };
    for (int col = 0; col < static_cast<int>(basis.size()); ++col) {
        const Ket3& k = basis[static_cast<std::size_t>(col)];
        const double n = k[s], m = k[2];
        if (n >= 2) {  // a_s^2 b^dag
            Ket3 t = k;
            t[s] -= 2;
            t[2] += 1;
            const int row = index(t);
            if (row >= 0) acc[{row, col}] += coef * sqrtd(n * (n - 1) * (m + 1));
        }
        if (m >= 1) {  // -a_s^dag^2 b
            Ket3 t = k;
            t[s] += 2;
            t[2] -= 1;
            const int row = index(t);
            if (row >= 0) acc[{row, col}] -= coef * sqrtd((n + 1) * (n + 2) * m);
        }
    }
}

}  // namespace detail

inline SparseHamiltonian build_sparse_hamiltonian(HamiltonianKind kind, int n_max1, int n_max2,
                                                  std::size_t max_dim = kDefaultMaxBasis) {
    std::vector<Ket3> basis = truncated_basis(kind, n_max1, n_max2, max_dim);
    auto index = [&](const Ket3& k) {
        auto it = std::lower_bound(basis.begin(), basis.end(), k);
        return (it != basis.end() && *it == k) ? static_cast<int>(it - basis.begin()) : -1;
    };
    std::vector<SparseEntry> entries;
    if (kind == HamiltonianKind::Trilinear) {
        for (int col = 0; col < static_cast<int>(basis.size()); ++col) {
            const auto [s1, s2, b] = basis[static_cast<std::size_t>(col)];
            if (s1 > 0 && s2 > 0) {  // <s1-1, s2-1, b+1| a1 a2 b^dag |s1, s2, b>
                const int row = index({s1 - 1, s2 - 1, b + 1});
                if (row >= 0) entries.push_back({row, col, std::sqrt(double(s1) * s2 * (b + 1))});
            }
            if (b > 0) {  // -<s1+1, s2+1, b-1| a1^dag a2^dag b |s1, s2, b>
                const int row = index({s1 + 1, s2 + 1, b - 1});
                if (row >= 0) entries.push_back({row, col, -std::sqrt(double(s1 + 1) * (s2 + 1) * b)});
            }
        }
    } else {
        // H' = (1/2)[(a2^2 - a1^2) b^dag + (a1^dag^2 - a2^dag^2) b]
        std::map<std::pair<int, int>, double> acc;
        detail::add_degenerate_shg(basis, 1, 0.5, acc);
        detail::add_degenerate_shg(basis, 0, -0.5, acc);
        for (const auto& [rc, v] : acc)
            if (v != 0.0) entries.push_back({rc.first, rc.second, v});
    }
    return SparseHamiltonian(kind, std::move(basis), std::move(entries));
}

inline SparseHamiltonian build_sparse_hamiltonian(HamiltonianKind kind, const TruncationSpec& trunc,
                                                  std::size_t max_dim = kDefaultMaxBasis) {
    if (!trunc.n_max) throw ValidationError("build_sparse_hamiltonian: an explicit n_max is required");
    if (*trunc.n_max > trunc.ceiling) {
        throw TruncationTooTight("n_max=" + std::to_string(*trunc.n_max) + " exceeds the cutoff ceiling " +
                                 std::to_string(trunc.ceiling));
    }
    return build_sparse_hamiltonian(kind, *trunc.n_max, *trunc.n_max, max_dim);
}

// ---------------------------------------------------------------------------
// exp(tau H) acting on vectors
// ---------------------------------------------------------------------------

struct ExpmOptions {
    double tolerance = 1e-9;            // relative error target
    int dense_threshold = 256;          // components below this use a dense exponential
    int krylov_dim = 30;                // Lanczos basis size per substep
    long max_matvecs = 2'000'000;       // iteration bound before ConvergenceFailure
};

// Skew-Lanczos: for real antisymmetric A the Krylov projection is itself skew
// tridiagonal, so the small exponential reuses SkewTridiagonalExp.
inline Eigen::VectorXd krylov_expm_action(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& v0, double tau,
                                          const ExpmOptions& opt, long* matvecs = nullptr) {
    const double norm0 = v0.norm();
    if (norm0 == 0.0 || tau == 0.0) return v0;
    const Eigen::Index n = v0.size();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, n));
    Eigen::VectorXd v = v0;
    double t_done = 0.0;
    const double t_total = std::abs(tau);
    const double sign = tau < 0 ? -1.0 : 1.0;
    double h = t_total;
    long used = 0;
    while (t_done < t_total) {
        // absorb a remainder left by rounding into the current step
        const double remaining = t_total - t_done;
        if (h >= remaining * (1.0 - 1e-10)) h = remaining;
        const double beta0 = v.norm();
        Eigen::MatrixXd basis(n, m_max + 1);
        basis.col(0) = v / beta0;
        std::vector<double> beta;
        int m = m_max;
        double residual = 0.0;
        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXd w = a * basis.col(j);
            ++used;
            if (j > 0) w += beta[static_cast<std::size_t>(j - 1)] * basis.col(j - 1);
            // full reorthogonalization keeps the projection antisymmetric to rounding
            for (int r = 0; r < 2; ++r) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
            const double b = w.norm();
            if (j + 1 == m_max) {
                residual = b;
                m = m_max;
                break;
            }
            if (b <= 1e-13 * beta0) {  // invariant subspace found: projection is exact
                residual = 0.0;
                m = j + 1;
                break;
            }
            beta.push_back(b);
            basis.col(j + 1) = w / b;
        }
        if (used > opt.max_matvecs) {
            throw ConvergenceFailure("krylov_expm_action: exceeded " + std::to_string(opt.max_matvecs) +
                                     " matrix-vector products");
        }
        beta.resize(static_cast<std::size_t>(m - 1));
        SkewTridiagonalExp small(beta);
        // projected H is skew tridiagonal with H(j+1,j) = beta_j; SkewTridiagonalExp uses the same sign
        Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(m);
        e1(0) = 1.0;
        for (;;) {
            Eigen::VectorXcd y = small.apply(e1, sign * h);
            const double err = beta0 * residual * std::abs(y(m - 1));
            // below the rounding floor of y the estimate carries no information
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * norm0;
            if (residual == 0.0 || err <= std::max(opt.tolerance * norm0 * (h / t_total), floor)) {
                v = beta0 * (basis.leftCols(m) * y.real());
                t_done = (h == remaining) ? t_total : t_done + h;
                if (residual != 0.0 && err < 0.1 * opt.tolerance * norm0 * (h / t_total)) h *= 1.5;
                break;
            }
            h *= 0.5;
            if (h < 1e-14 * t_total) {
                throw ConvergenceFailure("krylov_expm_action: step size underflow");
            }
        }
    }
    if (matvecs) *matvecs += used;
    return v;
}

// exp(tau H) on each connected component. Dense exponentials of the smaller
// components are built on first use and cached, so one propagator serves many
// input vectors at the same tau.
class SparsePropagator {
public:
    SparsePropagator(std::shared_ptr<const SparseHamiltonian> h, double tau, ExpmOptions opt = {})
        : h_(std::move(h)), tau_(tau), opt_(opt), dense_(h_->components().size()),
          once_(std::make_unique<std::once_flag[]>(h_->components().size())),
          sparse_(h_->components().size()), sparse_once_(std::make_unique<std::once_flag[]>(h_->components().size())) {}

    const SparseHamiltonian& hamiltonian() const { return *h_; }
    double tau() const { return tau_; }

    // Component-local result of exp(tau H) applied to a component-local vector.
    Eigen::VectorXcd apply_component(int c, const Eigen::VectorXcd& local) const {
        const auto& idx = h_->components()[static_cast<std::size_t>(c)];
        if (tau_ == 0.0 || idx.size() == 1) return local;
        if (static_cast<int>(idx.size()) < opt_.dense_threshold) {
            return dense(c).cast<cplx>() * local;
        }
        const auto& a = sparse(c);
        Eigen::VectorXd re = krylov_expm_action(a, local.real(), tau_, opt_);
        Eigen::VectorXd im = local.imag().isZero(0.0) ? Eigen::VectorXd::Zero(local.size())
                                                      : krylov_expm_action(a, local.imag(), tau_, opt_);
        Eigen::VectorXcd out(local.size());
        out.real() = re;
        out.imag() = im;
        return out;
    }

    // exp(tau H)|basis[index]>, restricted to that ket's component.
    Eigen::VectorXcd apply_basis(int index) const {
        const int c = h_->component_of(index);
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h_->components()[c].size()));
        e(h_->local_index(index)) = 1.0;
        return apply_component(c, e);
    }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const {
        if (psi.size() != h_->dimension()) throw ValidationError("expm_action: dimension mismatch");
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
        const auto& comps = h_->components();
        for (std::size_t c = 0; c < comps.size(); ++c) {
            Eigen::VectorXcd local(static_cast<Eigen::Index>(comps[c].size()));
            for (std::size_t k = 0; k < comps[c].size(); ++k) local(static_cast<Eigen::Index>(k)) = psi(comps[c][k]);
            if (local.isZero(0.0)) continue;
            Eigen::VectorXcd r = apply_component(static_cast<int>(c), local);
            for (std::size_t k = 0; k < comps[c].size(); ++k) out(comps[c][k]) = r(static_cast<Eigen::Index>(k));
        }
        return out;
    }

private:
    const Eigen::MatrixXd& dense(int c) const {
        std::call_once(once_[static_cast<std::size_t>(c)], [&] {
            Eigen::MatrixXd a(h_->component_matrix(c));
            dense_[static_cast<std::size_t>(c)] = (tau_ * a).exp();
        });
        return dense_[static_cast<std::size_t>(c)];
    }

    const Eigen::SparseMatrix<double>& sparse(int c) const {
        std::call_once(sparse_once_[static_cast<std::size_t>(c)],
                       [&] { sparse_[static_cast<std::size_t>(c)] = h_->component_matrix(c); });
        return sparse_[static_cast<std::size_t>(c)];
    }

    std::shared_ptr<const SparseHamiltonian> h_;
    double tau_;
    ExpmOptions opt_;
    mutable std::vector<Eigen::MatrixXd> dense_;
    std::unique_ptr<std::once_flag[]> once_;
    mutable std::vector<Eigen::SparseMatrix<double>> sparse_;
    std::unique_ptr<std::once_flag[]> sparse_once_;
};

inline Eigen::VectorXcd expm_action(const SparseHamiltonian& h, const Eigen::VectorXcd& psi, double tau,
                                    ExpmOptions opt = {}) {
    // non-owning alias; the propagator does not outlive this call
    std::shared_ptr<const SparseHamiltonian> alias(&h, [](const SparseHamiltonian*) {});
    return SparsePropagator(alias, tau, opt).apply(psi);
}

}  // namespace trilinear
