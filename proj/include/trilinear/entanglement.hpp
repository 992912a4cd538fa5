// entanglement.hpp — reduced states, partial transposes and correlation measures
//
// Density matrices are stored over the occupations actually present, split
// into independent Hermitian blocks (connected components of the nonzero
// pattern). Spectra are computed block by block.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "modes.hpp"
#include "state.hpp"

namespace trilinear {

inline constexpr double kNegativityFloor = 1e-10;

struct MatrixEntry {
    Occupation ket;
    Occupation bra;
    cplx value;
};

class LabeledMatrix {
public:
    struct Block {
        std::vector<int> index;  // basis positions
        Eigen::MatrixXcd matrix;
    };

    LabeledMatrix() = default;

    ModeSet modes() const { return modes_; }
    const std::vector<Occupation>& basis() const { return basis_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    int dimension() const { return static_cast<int>(basis_.size()); }
    // Largest occupation per mode that the matrix may carry (tensor-basis cutoff).
    const Occupation& cutoffs() const { return cutoffs_; }

    int position_of(const Occupation& occ) const {
        auto it = std::lower_bound(basis_.begin(), basis_.end(), occ);
        return (it != basis_.end() && *it == occ) ? static_cast<int>(it - basis_.begin()) : -1;
    }

    cplx element(int i, int j) const {
        if (block_of_[i] != block_of_[j]) return {};
        return blocks_[block_of_[i]].matrix(pos_[i], pos_[j]);
    }

    cplx element(const Occupation& ket, const Occupation& bra) const {
        const int i = position_of(ket), j = position_of(bra);
        return (i < 0 || j < 0) ? cplx{} : element(i, j);
    }

    cplx trace() const {
        cplx t{};
        for (const auto& b : blocks_) t += b.matrix.trace();
        return t;
    }

    double purity() const {
        double s = 0.0;
        for (const auto& b : blocks_) s += b.matrix.cwiseAbs2().sum();
        return s;
    }

    double hermiticity_error() const {
        double e = 0.0;
        for (const auto& b : blocks_) e = std::max(e, (b.matrix - b.matrix.adjoint()).cwiseAbs().maxCoeff());
        return e;
    }

    LabeledMatrix scaled(double f) const {
        LabeledMatrix out = *this;
        for (auto& b : out.blocks_) b.matrix *= f;
        return out;
    }

    LabeledMatrix normalized() const {
        const double t = trace().real();
        if (!(t > 0.0)) throw ValidationError("LabeledMatrix::normalized: trace is not positive");
        return scaled(1.0 / t);
    }

    // Sorted spectrum, assuming the matrix is Hermitian.
    std::vector<double> eigenvalues() const {
        std::vector<double> ev;
        ev.reserve(basis_.size());
        for (const auto& b : blocks_) {
            if (b.matrix.rows() == 1) {
                ev.push_back(b.matrix(0, 0).real());
                continue;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix, Eigen::EigenvaluesOnly);
            for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) ev.push_back(es.eigenvalues()(k));
        }
        std::sort(ev.begin(), ev.end());
        return ev;
    }

    // Dense matrix in basis order.
    Eigen::MatrixXcd to_dense() const {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dimension(), dimension());
        for (const auto& b : blocks_)
            for (std::size_t r = 0; r < b.index.size(); ++r)
                for (std::size_t c = 0; c < b.index.size(); ++c) m(b.index[r], b.index[c]) = b.matrix(r, c);
        return m;
    }

    // Dense matrix over the full tensor product of the modes (in canonical mode
    // order, each of dimension cutoff+1, last mode fastest).
    Eigen::MatrixXcd to_tensor_dense() const {
        const auto ms = modes_.modes();
        auto flat = [&](const Occupation& o) {
            Eigen::Index k = 0;
            for (Mode m : ms) k = k * (cutoffs_[index_of(m)] + 1) + o[index_of(m)];
            return k;
        };
        Eigen::Index dim = 1;
        for (Mode m : ms) dim *= cutoffs_[index_of(m)] + 1;
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& b : blocks_)
            for (std::size_t r = 0; r < b.index.size(); ++r)
                for (std::size_t c = 0; c < b.index.size(); ++c)
                    out(flat(basis_[b.index[r]]), flat(basis_[b.index[c]])) = b.matrix(r, c);
        return out;
    }

    template <class Fn>
    void for_each_entry(Fn&& fn) const {
        for (const auto& b : blocks_)
            for (std::size_t r = 0; r < b.index.size(); ++r)
                for (std::size_t c = 0; c < b.index.size(); ++c) {
                    const cplx v = b.matrix(r, c);
                    if (v != cplx{}) fn(basis_[b.index[r]], basis_[b.index[c]], v);
                }
    }

    // Duplicate (ket, bra) pairs are summed.
    static LabeledMatrix from_entries(ModeSet modes, const Occupation& cutoffs, const std::vector<MatrixEntry>& entries) {
        LabeledMatrix m;
        m.modes_ = modes;
        m.cutoffs_ = cutoffs;
        m.basis_.reserve(entries.size());
        for (const auto& e : entries) {
            m.basis_.push_back(e.ket);
            m.basis_.push_back(e.bra);
        }
        std::sort(m.basis_.begin(), m.basis_.end());
        m.basis_.erase(std::unique(m.basis_.begin(), m.basis_.end()), m.basis_.end());
        DisjointSets sets(m.basis_.size());
        std::vector<std::pair<int, int>> ij(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            ij[k] = {m.position_of(entries[k].ket), m.position_of(entries[k].bra)};
            sets.unite(ij[k].first, ij[k].second);
        }
        m.build_blocks(sets);
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto [i, j] = ij[k];
            m.blocks_[m.block_of_[i]].matrix(m.pos_[i], m.pos_[j]) += entries[k].value;
        }
        return m;
    }

    // Partial trace of a pure state. Terms sharing all traced occupations
    // contribute outer products; these groups also define the blocks.
    static LabeledMatrix reduce_pure(const FockState& psi, ModeSet keep, const Occupation& cutoffs) {
        struct Item {
            Occupation traced;
            int kept_index;
            cplx amp;
        };
        LabeledMatrix m;
        m.modes_ = keep;
        m.cutoffs_ = cutoffs;
        auto kept_part = [&](Occupation o) {
            for (Mode md : kAllModes)
                if (!keep.contains(md)) o[index_of(md)] = 0;
            return o;
        };
        auto traced_part = [&](Occupation o) {
            for (Mode md : kAllModes)
                if (keep.contains(md)) o[index_of(md)] = 0;
            return o;
        };
        m.basis_.reserve(psi.size());
        for (const auto& [occ, a] : psi.terms()) m.basis_.push_back(kept_part(occ));
        std::sort(m.basis_.begin(), m.basis_.end());
        m.basis_.erase(std::unique(m.basis_.begin(), m.basis_.end()), m.basis_.end());

        std::vector<Item> items;
        items.reserve(psi.size());
        for (const auto& [occ, a] : psi.terms()) items.push_back({traced_part(occ), m.position_of(kept_part(occ)), a});
        std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
            return x.traced != y.traced ? x.traced < y.traced : x.kept_index < y.kept_index;
        });
        std::vector<std::pair<std::size_t, std::size_t>> groups;
        for (std::size_t s = 0; s < items.size();) {
            std::size_t e = s + 1;
            while (e < items.size() && items[e].traced == items[s].traced) ++e;
            groups.emplace_back(s, e);
            s = e;
        }
        DisjointSets sets(m.basis_.size());
        for (const auto& [s, e] : groups)
            for (std::size_t k = s + 1; k < e; ++k) sets.unite(items[s].kept_index, items[k].kept_index);
        m.build_blocks(sets);
        for (const auto& [s, e] : groups) {
            auto& blk = m.blocks_[m.block_of_[items[s].kept_index]].matrix;
            for (std::size_t x = s; x < e; ++x) {
                const int px = m.pos_[items[x].kept_index];
                for (std::size_t y = s; y < e; ++y) blk(px, m.pos_[items[y].kept_index]) += items[x].amp * std::conj(items[y].amp);
            }
        }
        return m;
    }

private:
    struct DisjointSets {
        std::vector<int> parent;
        explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
        int find(int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        }
        void unite(int a, int b) {
            a = find(a);
            b = find(b);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    };

    void build_blocks(DisjointSets& sets) {
        const std::size_t n = basis_.size();
        block_of_.assign(n, -1);
        pos_.assign(n, -1);
        std::vector<int> root_block(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const int r = sets.find(static_cast<int>(i));
            if (root_block[r] < 0) {
                root_block[r] = static_cast<int>(blocks_.size());
                blocks_.emplace_back();
            }
            auto& blk = blocks_[root_block[r]];
            block_of_[i] = root_block[r];
            pos_[i] = static_cast<int>(blk.index.size());
            blk.index.push_back(static_cast<int>(i));
        }
        for (auto& b : blocks_) {
            const auto d = static_cast<Eigen::Index>(b.index.size());
            b.matrix = Eigen::MatrixXcd::Zero(d, d);
        }
    }

    ModeSet modes_;
    Occupation cutoffs_{};
    std::vector<Occupation> basis_;
    std::vector<Block> blocks_;
    std::vector<int> block_of_;
    std::vector<int> pos_;
};

using DensityMatrix = LabeledMatrix;

// ---------------------------------------------------------------------------
// Partial trace and transpose
// ---------------------------------------------------------------------------

inline Occupation state_cutoffs(const SystemState& s) {
    Occupation c{};
    c[index_of(Mode::S1)] = c[index_of(Mode::I1)] = s.n_max1();
    c[index_of(Mode::S2)] = c[index_of(Mode::I2)] = s.n_max2();
    c[index_of(Mode::B)] = s.sh_max();
    return c;
}

inline Occupation fock_cutoffs(const FockState& psi) {
    Occupation c{};
    for (Mode m : kAllModes) c[index_of(m)] = psi.max_occupation(m);
    return c;
}

// Reduced state on `keep`, normalized to unit trace.
inline DensityMatrix partial_trace(const FockState& psi, ModeSet keep, std::optional<Occupation> cutoffs = std::nullopt) {
    if (keep.empty()) throw EmptyKeepSet();
    const double n2 = psi.norm_squared();
    if (!(n2 > 0.0)) throw ValidationError("partial_trace: state has zero norm");
    return LabeledMatrix::reduce_pure(psi, keep, cutoffs.value_or(fock_cutoffs(psi))).scaled(1.0 / n2);
}

inline DensityMatrix partial_trace(const SystemState& state, ModeSet keep) {
    return partial_trace(state.to_fock(), keep, state_cutoffs(state));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, ModeSet keep) {
    if (keep.empty()) throw EmptyKeepSet();
    if (!keep.subset_of(rho.modes())) {
        throw UnknownMode("partial_trace: keep set '" + keep.to_string() + "' is not within '" + rho.modes().to_string() + "'");
    }
    const ModeSet traced = keep.complement_in(rho.modes());
    std::vector<MatrixEntry> entries;
    rho.for_each_entry([&](const Occupation& ket, const Occupation& bra, cplx v) {
        for (Mode m : traced.modes())
            if (ket[index_of(m)] != bra[index_of(m)]) return;
        Occupation k = ket, b = bra;
        for (Mode m : traced.modes()) k[index_of(m)] = b[index_of(m)] = 0;
        entries.push_back({k, b, v});
    });
    Occupation cut = rho.cutoffs();
    for (Mode m : traced.modes()) cut[index_of(m)] = 0;
    if (entries.empty()) throw ValidationError("partial_trace: matrix has no entries");
    return LabeledMatrix::from_entries(keep, cut, entries).normalized();
}

// Swaps ket and bra occupations of the modes in `subsystem`.
inline LabeledMatrix partial_transpose(const LabeledMatrix& rho, ModeSet subsystem) {
    if (subsystem.empty() || !subsystem.subset_of(rho.modes()) || subsystem == rho.modes()) {
        throw InvalidSubsystem("partial_transpose: '" + subsystem.to_string() + "' is not a proper nonempty subset of '" +
                               rho.modes().to_string() + "'");
    }
    std::vector<MatrixEntry> entries;
    entries.reserve(static_cast<std::size_t>(rho.dimension()));
    rho.for_each_entry([&](Occupation ket, Occupation bra, cplx v) {
        for (Mode m : subsystem.modes()) std::swap(ket[index_of(m)], bra[index_of(m)]);
        entries.push_back({ket, bra, v});
    });
    return LabeledMatrix::from_entries(rho.modes(), rho.cutoffs(), entries);
}

// ---------------------------------------------------------------------------
// Negativity
// ---------------------------------------------------------------------------

struct NegativityReport {
    double negativity = 0.0;
    double log_negativity = 0.0;
    double min_eigenvalue = 0.0;
    // Upper bound on the negativity of blocks skipped as negligible.
    double skipped_bound = 0.0;
};

inline NegativityReport negativity_from_spectrum(const std::vector<double>& eigenvalues, double floor = kNegativityFloor) {
    NegativityReport r;
    for (double l : eigenvalues) {
        r.min_eigenvalue = std::min(r.min_eigenvalue, l);
        if (l < -floor) r.negativity += -l;
    }
    r.log_negativity = std::log2(1.0 + 2.0 * r.negativity);
    return r;
}

// Negativity of rho across partition_B | (rho.modes() minus partition_B).
inline NegativityReport negativity_report(const DensityMatrix& rho, ModeSet partition_b, double floor = kNegativityFloor) {
    return negativity_from_spectrum(partial_transpose(rho, partition_b).eigenvalues(), floor);
}

namespace detail {

// Sums the negative spectrum of independent Hermitian blocks. A block whose
// Gershgorin discs all lie in [0, inf) has no negative eigenvalue and is
// skipped; min_eigenvalue is therefore min(0, most negative eigenvalue).
// Blocks whose trace norm is provably below kNegligibleBlock (via
// sqrt(dim) * Frobenius norm) are skipped and their bound is summed.
inline constexpr double kNegligibleBlock = 1e-15;

class NegativityAccumulator {
public:
    NegativityAccumulator(double floor, bool real_valued) : floor_(floor), real_(real_valued) {}

    void add(const Eigen::MatrixXcd& m) {
        const Eigen::Index dim = m.rows();
        const double bound = std::sqrt(static_cast<double>(dim)) * m.norm();
        if (bound < kNegligibleBlock) {
            skipped_ += bound;
            return;
        }
        bool dominant = true;
        for (Eigen::Index i = 0; i < dim && dominant; ++i) {
            double radius = 0.0;
            for (Eigen::Index j = 0; j < dim; ++j)
                if (j != i) radius += std::abs(m(i, j));
            dominant = m(i, i).real() - radius >= 0.0;
        }
        if (dominant) return;
        if (real_) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real(), Eigen::EigenvaluesOnly);
            take(es.eigenvalues());
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            take(es.eigenvalues());
        }
    }

    NegativityReport report() const { return {neg_, std::log2(1.0 + 2.0 * neg_), min_ev_, skipped_}; }

private:
    void take(const Eigen::VectorXd& ev) {
        for (Eigen::Index q = 0; q < ev.size(); ++q) {
            min_ev_ = std::min(min_ev_, ev(q));
            if (ev(q) < -floor_) neg_ += -ev(q);
        }
    }

    double floor_;
    bool real_;
    double neg_ = 0.0;
    double min_ev_ = 0.0;
    double skipped_ = 0.0;
};

}  // namespace detail

// Negativity of the reduced state on A and B across the A|B cut.
inline NegativityReport bipartite_negativity(const FockState& psi, ModeSet a, ModeSet b,
                                             std::optional<Occupation> cutoffs = std::nullopt) {
    return negativity_report(partial_trace(psi, a.united(b), cutoffs), b);
}

inline NegativityReport bipartite_negativity(const SystemState& state, ModeSet a, ModeSet b) {
    return bipartite_negativity(state.to_fock(), a, b, state_cutoffs(state));
}

// i1 i2 ; b negativity from the block structure of the transposed reduced state:
// it splits over d = n_i1 - n_i2 and s = n_i1 + (b label of the ket), each
// block indexed by n_i1 with element
//     (n, k) = A(n, n-d, s-k) conj(A(k, k-d, s-n)),
// where A(n, n', j) is the amplitude of |n-j, n'-j, j>|n, n'>.
inline NegativityReport idler_sh_negativity(const SystemState& st, double floor = kNegativityFloor) {
    const int n1 = st.n_max1(), n2 = st.n_max2(), sh = st.sh_max();
    const double norm = st.norm_squared();
    detail::NegativityAccumulator acc(floor, st.is_real());
    std::vector<int> rows;
    for (int d = -n2; d <= n1; ++d) {
        for (int s = 0; s <= n1 + sh; ++s) {
            rows.clear();
            for (int n = std::max({0, d, s - sh}); n <= std::min({n1, n2 + d, s}); ++n) rows.push_back(n);
            const auto dim = static_cast<Eigen::Index>(rows.size());
            if (dim < 2) continue;  // a 1x1 block is a diagonal element of the state: never negative
            Eigen::MatrixXcd m(dim, dim);
            bool off_diag = false;
            for (Eigen::Index a = 0; a < dim; ++a) {
                for (Eigen::Index b = 0; b < dim; ++b) {
                    const int n = rows[a], k = rows[b];
                    m(a, b) = st.amplitude(n, n - d, s - k) * std::conj(st.amplitude(k, k - d, s - n)) / norm;
                    if (a != b && m(a, b) != cplx{}) off_diag = true;
                }
            }
            if (off_diag) acc.add(m);
        }
    }
    return acc.report();
}

// s1 ; i1 negativity. The transposed reduced state splits over S = n_s1 + n_i1
// (ket labels); in block S with ket (x, S-x) and bra (x', S-x'),
//     element = sum_{n'} A(S-x', n', j) conj(A(S-x, n', j)),  j = S-x-x' >= 0.
inline NegativityReport signal_idler_negativity(const SystemState& st, double floor = kNegativityFloor) {
    const int n1 = st.n_max1(), n2 = st.n_max2();
    const double norm = st.norm_squared();
    detail::NegativityAccumulator acc(floor, st.is_real());
    for (int s_tot = 0; s_tot <= 2 * n1; ++s_tot) {
        const int lo = std::max(0, s_tot - n1), hi = std::min(n1, s_tot);
        const auto dim = static_cast<Eigen::Index>(hi - lo + 1);
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        for (int x = lo; x <= hi; ++x) {
            for (int xp = lo; xp <= hi; ++xp) {
                const int j = s_tot - x - xp;
                if (j < 0) continue;
                cplx v{};
                for (int np = j; np <= n2; ++np) v += st.amplitude(s_tot - xp, np, j) * std::conj(st.amplitude(s_tot - x, np, j));
                m(x - lo, xp - lo) = v / norm;
            }
        }
        acc.add(m);
    }
    return acc.report();
}

// s1 s2 ; b negativity. The transposed reduced state splits over
// d = n_s1 - n_s2 and e = n_s1 - n_b; in block (d, e) with kets indexed by
// x = n_s1, each element comes from a single sector:
//     (x, x') = A(n, n-d, x'-e) conj(A(n, n-d, x-e)),  n = x + x' - e.
inline NegativityReport signal_pair_sh_negativity(const SystemState& st, double floor = kNegativityFloor) {
    const int n1 = st.n_max1(), n2 = st.n_max2(), sh = st.sh_max();
    const double norm = st.norm_squared();
    detail::NegativityAccumulator acc(floor, st.is_real());
    std::vector<int> rows;
    for (int d = -n2; d <= n1; ++d) {
        for (int e = -sh; e <= n1; ++e) {
            rows.clear();
            for (int x = std::max({0, d, e}); x <= std::min({n1, n2 + d, sh + e}); ++x) rows.push_back(x);
            const auto dim = static_cast<Eigen::Index>(rows.size());
            if (dim < 2) continue;
            Eigen::MatrixXcd m(dim, dim);
            bool off_diag = false;
            for (Eigen::Index a = 0; a < dim; ++a) {
                for (Eigen::Index b = 0; b < dim; ++b) {
                    const int x = rows[a], xp = rows[b], n = x + xp - e;
                    m(a, b) = st.amplitude(n, n - d, xp - e) * std::conj(st.amplitude(n, n - d, x - e)) / norm;
                    if (a != b && m(a, b) != cplx{}) off_diag = true;
                }
            }
            if (off_diag) acc.add(m);
        }
    }
    return acc.report();
}

// A bipartition "A;B" of two disjoint, non-empty mode sets.
struct Bipartition {
    ModeSet a;
    ModeSet b;

    static Bipartition parse(std::string_view text) {
        const auto semi = text.find(';');
        if (semi == std::string_view::npos || text.find(';', semi + 1) != std::string_view::npos) {
            throw ValidationError("bipartition '" + std::string(text) + "' must have the form A;B, e.g. i1i2;b");
        }
        Bipartition p{ModeSet::parse(text.substr(0, semi)), ModeSet::parse(text.substr(semi + 1))};
        if (!(p.a.united(p.b).size() == p.a.size() + p.b.size())) {
            throw InvalidSubsystem("bipartition '" + std::string(text) + "' has overlapping sides");
        }
        return p;
    }

    std::string to_string() const { return a.to_string() + ";" + b.to_string(); }

    // Negativity is symmetric under swapping the sides.
    bool matches(ModeSet x, ModeSet y) const { return (a == x && b == y) || (a == y && b == x); }
};

// Negativity across a bipartition, using a block-structured path when one
// exists for that cut and the generic reduced-state path otherwise.
inline NegativityReport partition_negativity(const SystemState& st, const Bipartition& p) {
    if (p.matches({Mode::I1, Mode::I2}, {Mode::B})) return idler_sh_negativity(st);
    if (p.matches({Mode::S1}, {Mode::I1})) return signal_idler_negativity(st);
    if (p.matches({Mode::S1, Mode::S2}, {Mode::B})) return signal_pair_sh_negativity(st);
    return bipartite_negativity(st, p.a, p.b);
}

// ---------------------------------------------------------------------------
// Closed forms for a single TMSVS
// ---------------------------------------------------------------------------

struct TmsvsAnalytics {
    double log_negativity;
    double entropy;
};

inline double binary_entropy(double x) {
    auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
    return term(x) + term(1.0 - x);
}

inline TmsvsAnalytics tmsvs_analytics(double r) {
    if (!(r >= 0.0)) throw ValidationError("tmsvs_analytics: r must be >= 0");
    const double c = std::cosh(r), t = std::tanh(r);
    return {2.0 * r / std::log(2.0), c * c * binary_entropy(t * t)};
}

// von Neumann entropy (bits) of a spectrum.
inline double spectral_entropy(const std::vector<double>& p) {
    double s = 0.0;
    for (double x : p)
        if (x > 0.0) s -= x * std::log2(x);
    return s;
}

// The TMSVS on (signal, idler) truncated at n_max pairs.
inline FockState tmsvs_fock_state(const SqueezeParams& p, int n_max, Mode signal = Mode::S1, Mode idler = Mode::I1) {
    std::vector<FockState::Term> terms;
    for (int n = 0; n <= n_max; ++n) {
        Occupation o{};
        o[index_of(signal)] = n;
        o[index_of(idler)] = n;
        terms.emplace_back(o, tmsvs_coefficient(p, n));
    }
    return FockState(std::move(terms));
}

// ---------------------------------------------------------------------------
// Purity-based witnesses
// ---------------------------------------------------------------------------

inline double purity(const DensityMatrix& rho) { return rho.purity(); }

// purity(rho_{i1 i2 b}) - purity(rho_{i1 i2}). rho_{i1 i2 b} is a sum of
// orthogonal rank-one terms, one per signal pair (p, q), and rho_{i1 i2} is
// diagonal with weights |w_{n n'}|^2 ||sector||^2.
inline double purity_difference(const SystemState& st) {
    const int n1 = st.n_max1(), n2 = st.n_max2();
    const double norm = st.norm_squared();
    double joint = 0.0, idlers = 0.0;
    for (int p = 0; p <= n1; ++p) {
        for (int q = 0; q <= n2; ++q) {
            double w = 0.0;
            for (int j = 0; p + j <= n1 && q + j <= n2; ++j) w += std::norm(st.amplitude(p + j, q + j, j));
            w /= norm;
            joint += w * w;
        }
    }
    for (int n = 0; n <= n1; ++n) {
        for (int np = 0; np <= n2; ++np) {
            const double w = std::norm(st.weight(n, np)) * st.sector(n, np).amplitudes.squaredNorm() / norm;
            idlers += w * w;
        }
    }
    return joint - idlers;
}

// Spectrum of rho_{i1 i2} (x) 1_b - rho_{i1 i2 b} with b of dimension sh_max+1.
// The operator splits over (p, q) = (n_i1 - n_b, n_i2 - n_b): each block is a
// diagonal of idler probabilities minus one rank-one term.
inline std::vector<double> reduction_spectrum(const SystemState& st) {
    const int n1 = st.n_max1(), n2 = st.n_max2(), sh = st.sh_max();
    const double norm = st.norm_squared();
    auto idler_prob = [&](int n, int np) {
        return std::norm(st.weight(n, np)) * st.sector(n, np).amplitudes.squaredNorm() / norm;
    };
    std::vector<double> ev;
    ev.reserve(static_cast<std::size_t>((n1 + 1) * (n2 + 1) * (sh + 1)));
    for (int p = -sh; p <= n1; ++p) {
        for (int q = -sh; q <= n2; ++q) {
            std::vector<int> js;
            for (int j = std::max({0, -p, -q}); j <= sh && p + j <= n1 && q + j <= n2; ++j) js.push_back(j);
            if (js.empty()) continue;
            const auto dim = static_cast<Eigen::Index>(js.size());
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
            Eigen::VectorXcd v(dim);
            for (Eigen::Index a = 0; a < dim; ++a) {
                const int j = js[a];
                m(a, a) = idler_prob(p + j, q + j);
                v(a) = (p >= 0 && q >= 0) ? st.amplitude(p + j, q + j, j) / std::sqrt(norm) : cplx{};
            }
            m -= v * v.adjoint();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            for (Eigen::Index a = 0; a < dim; ++a) ev.push_back(es.eigenvalues()(a));
        }
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

// ---------------------------------------------------------------------------
// Photon statistics
// ---------------------------------------------------------------------------

inline std::vector<double> number_distribution(const FockState& psi, Mode mode) {
    const double n2 = psi.norm_squared();
    std::vector<double> p(static_cast<std::size_t>(psi.max_occupation(mode) + 1), 0.0);
    for (const auto& [occ, a] : psi.terms()) p[static_cast<std::size_t>(occ[index_of(mode)])] += std::norm(a) / n2;
    return p;
}

inline std::vector<double> number_distribution(const DensityMatrix& rho, Mode mode) {
    if (!rho.modes().contains(mode)) throw UnknownMode("number_distribution: mode not present");
    std::vector<double> p(static_cast<std::size_t>(rho.cutoffs()[index_of(mode)] + 1), 0.0);
    const double t = rho.trace().real();
    for (int i = 0; i < rho.dimension(); ++i) {
        const int k = rho.basis()[i][index_of(mode)];
        if (k >= static_cast<int>(p.size())) p.resize(static_cast<std::size_t>(k + 1), 0.0);
        p[static_cast<std::size_t>(k)] += rho.element(i, i).real() / t;
    }
    return p;
}

// (<n^2> - <n>^2) / <n> - 1
inline double mandel_q(const std::vector<double>& distribution) {
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t n = 0; n < distribution.size(); ++n) {
        const double p = distribution[n];
        if (p < -1e-12) throw ValidationError("mandel_q: negative probability");
        total += p;
        mean += static_cast<double>(n) * p;
        second += static_cast<double>(n) * static_cast<double>(n) * p;
    }
    if (std::abs(total - 1.0) > 1e-8) throw ValidationError("mandel_q: distribution is not normalized");
    if (mean <= 0.0) throw UndefinedForVacuum();
    return (second - mean * mean) / mean - 1.0;
}

enum class Quadrature { X, Y };

// Normalization of the quadratures: Half gives X = (a + a^dag)/2 and
// Y = i(a - a^dag)/2 (vacuum variance 1/4); Unit drops the factor 1/2.
enum class QuadratureScale { Half, Unit };

inline double quadrature_covariance(const FockState& psi, Mode a, Mode b, Quadrature q,
                                    QuadratureScale scale = QuadratureScale::Half) {
    if (a == b) throw InvalidSubsystem("quadrature_covariance: modes must be distinct");
    const double s = scale == QuadratureScale::Half ? 0.5 : 1.0;
    auto apply = [&](Mode m) {
        if (q == Quadrature::X) return psi.lowered(m).plus(psi.raised(m)).scaled(s);
        return psi.lowered(m).plus(psi.raised(m).scaled(-1.0)).scaled(cplx(0.0, s));
    };
    const double n2 = psi.norm_squared();
    const FockState qa = apply(a), qb = apply(b);
    const double mean_a = psi.inner(qa).real() / n2;
    const double mean_b = psi.inner(qb).real() / n2;
    const double joint = qa.inner(qb).real() / n2;  // Q_a, Q_b commute and are Hermitian
    return joint - mean_a * mean_b;
}

}  // namespace trilinear
