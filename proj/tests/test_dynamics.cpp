// test_dynamics.cpp — sector ladders, sparse generators and exp(tau H) actions
#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "support/oracles.hpp"
#include "trilinear/dynamics.hpp"
#include "trilinear/state.hpp"

using namespace trilinear;

namespace {

// Every ket reachable from the TMSVS product basis up to the cutoffs.
std::vector<Occupation> trilinear_oracle_basis(int n1, int n2) {
    std::vector<Occupation> basis;
    for (int i1 = 0; i1 <= n1; ++i1)
        for (int i2 = 0; i2 <= n2; ++i2)
            for (int b = 0; b <= std::min(i1, i2); ++b) basis.push_back(oracle::ket(i1 - b, i2 - b, b, i1, i2));
    return basis;
}

Occupation to_occ(const Ket3& k) { return oracle::ket(k[0], k[1], k[2]); }

FockState sparse_vector_to_fock(const SparseHamiltonian& h, const Eigen::VectorXcd& v) {
    std::vector<FockState::Term> terms;
    for (int i = 0; i < h.dimension(); ++i)
        if (v(i) != cplx{}) terms.emplace_back(to_occ(h.basis()[static_cast<std::size_t>(i)]), v(i));
    return FockState(std::move(terms));
}

}  // namespace

TEST(SectorGenerator, Examples) {
    EXPECT_EQ(sector_generator({0, 0}), Eigen::MatrixXd::Zero(1, 1));
    Eigen::MatrixXd g11(2, 2);
    g11 << 0, -1, 1, 0;
    EXPECT_EQ(sector_generator({1, 1}), g11);
    const Eigen::MatrixXd g21 = sector_generator({2, 1});
    ASSERT_EQ(g21.rows(), 2);
    EXPECT_NEAR(g21(1, 0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g21(0, 1), -std::sqrt(2.0), 1e-15);
    EXPECT_THROW(sector_generator({-1, 0}), ValidationError);
}

TEST(SectorGenerator, MatchesLadderOperatorOracle) {
    for (int n = 0; n <= 5; ++n)
        for (int np = 0; np <= 5; ++np) {
            std::vector<Occupation> basis;
            for (int j = 0; j <= std::min(n, np); ++j) basis.push_back(oracle::ket(n - j, np - j, j, n, np));
            const Eigen::MatrixXd ref = oracle::generator_matrix(basis, oracle::apply_trilinear);
            EXPECT_LT((sector_generator({n, np}) - ref).cwiseAbs().maxCoeff(), 1e-13) << n << "," << np;
        }
}

TEST(Evolve, ZeroTauIsIdentity) {
    const SystemState s = build_initial_state(1.5, 0.5, TruncationSpec::automatic(1e-8, 80));
    const SystemState t = evolve(s, 0.0);
    for (std::size_t k = 0; k < s.sectors().size(); ++k) EXPECT_EQ(t.sectors()[k].amplitudes, s.sectors()[k].amplitudes);
}

TEST(Evolve, SingleQuantumSectorRotates) {
    const SystemState s = build_initial_state(SqueezeParams(0.3), SqueezeParams(0.3), TruncationSpec::fixed(6, 1e-2));
    const TrilinearEvolver ev(s);
    for (double tau : {0.1, 0.7, 2.0}) {
        const SystemState t = ev.evolve(s, tau);
        const auto& a = t.sector(1, 1).amplitudes;
        EXPECT_NEAR(a(0).real(), std::cos(tau), 1e-14);
        EXPECT_NEAR(a(1).real(), std::sin(tau), 1e-14);
    }
}

TEST(Evolve, InverseAndGroupProperty) {
    const SystemState s = build_initial_state(2.5, 1.0, TruncationSpec::automatic(1e-6, 80));
    const TrilinearEvolver ev(s);
    const SystemState back = ev.evolve(ev.evolve(s, 0.37), -0.37);
    const SystemState split = ev.evolve(ev.evolve(s, 0.2), 0.3);
    const SystemState whole = ev.evolve(s, 0.5);
    for (std::size_t k = 0; k < s.sectors().size(); ++k) {
        EXPECT_LT((back.sectors()[k].amplitudes - s.sectors()[k].amplitudes).norm(), 1e-12);
        EXPECT_LT((split.sectors()[k].amplitudes - whole.sectors()[k].amplitudes).norm(), 1e-12);
    }
    EXPECT_DOUBLE_EQ(whole.tau(), 0.5);
}

TEST(Evolve, MatchesDenseOracle) {
    for (int n_max : {2, 4, 6}) {
        const SystemState s = build_initial_state(SqueezeParams(0.5, 0.2), SqueezeParams(0.4, -0.7),
                                                  TruncationSpec::fixed(n_max, 1.0));
        const auto basis = trilinear_oracle_basis(n_max, n_max);
        for (double tau : {0.05, 0.5, 1.3}) {
            const FockState ref = oracle::dense_evolve(s.to_fock(), basis, tau, oracle::apply_trilinear);
            EXPECT_LT(oracle::distance(evolve(s, tau).to_fock(), ref), 1e-12) << "n_max=" << n_max << " tau=" << tau;
        }
    }
}

TEST(Evolve, PreservesNormAndConservedNumbers) {
    const SystemState s = build_initial_state(1.5, 1.5, TruncationSpec::fixed(10, 1.0, 40));
    const double n0 = s.norm_squared();
    const FockState f0 = s.to_fock();
    const double c1 = f0.expectation_number(Mode::S1) + f0.expectation_number(Mode::B);
    const double c2 = f0.expectation_number(Mode::S2) + f0.expectation_number(Mode::B);
    for (double tau = 0.0; tau <= 1.0; tau += 0.1) {
        const FockState f = evolve(s, tau).to_fock();
        EXPECT_NEAR(f.norm_squared(), n0, 1e-12);
        EXPECT_NEAR(f.expectation_number(Mode::S1) + f.expectation_number(Mode::B), c1, 1e-10);
        EXPECT_NEAR(f.expectation_number(Mode::S2) + f.expectation_number(Mode::B), c2, 1e-10);
    }
}

TEST(Evolve, ShortTimeSumFrequencyPopulation) {
    // first order: tau a1 a2 |psi>|1_b>, so <n_b> ~ tau^2 <n_s1 n_s2> = tau^2 nbar1 nbar2
    const SystemState s = build_initial_state(1.5, 0.5, TruncationSpec::automatic(1e-12, 120));
    const double tau = 1e-3;
    const double nb = evolve(s, tau).to_fock().expectation_number(Mode::B);
    EXPECT_NEAR(nb / (tau * tau * 1.5 * 0.5), 1.0, 1e-2);
}

TEST(Evolve, RejectsCutoffMismatchAndNonFiniteTau) {
    const SystemState s = build_initial_state(1.5, 1.5, TruncationSpec::fixed(10, 1.0));
    EXPECT_THROW(TrilinearEvolver(4, 4).evolve(s, 0.1), ValidationError);
    EXPECT_THROW(evolve(s, std::nan("")), ValidationError);
}

TEST(SparseHamiltonian, TrilinearMatchesOracle) {
    for (int n_max : {1, 3}) {
        const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Trilinear, n_max, n_max);
        std::vector<Occupation> basis;
        for (const auto& k : h.basis()) basis.push_back(to_occ(k));
        const Eigen::MatrixXd ref = oracle::generator_matrix(basis, oracle::apply_trilinear);
        EXPECT_LT((Eigen::MatrixXd(h.matrix()) - ref).cwiseAbs().maxCoeff(), 1e-14);
    }
    // n_max = 1 basis: |0,0,0>, |0,1,0>, |1,0,0>, |1,1,0>, |0,0,1>, and |1,1,0> <-> |0,0,1> only
    const SparseHamiltonian h1 = build_sparse_hamiltonian(HamiltonianKind::Trilinear, 1, 1);
    EXPECT_EQ(h1.dimension(), 5);
    const int a = h1.index_of({1, 1, 0}), b = h1.index_of({0, 0, 1});
    EXPECT_DOUBLE_EQ(h1.element(b, a), 1.0);
    EXPECT_DOUBLE_EQ(h1.element(a, b), -1.0);
    EXPECT_EQ(h1.entries().size(), 2u);
}

TEST(SparseHamiltonian, TransformedMatchesIndependentShg) {
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Transformed, 3, 3);
    std::vector<Occupation> basis;
    for (const auto& k : h.basis()) basis.push_back(to_occ(k));
    const Eigen::MatrixXd ref = oracle::generator_matrix(basis, oracle::apply_transformed);
    EXPECT_LT((Eigen::MatrixXd(h.matrix()) - ref).cwiseAbs().maxCoeff(), 1e-14);
    // <0,0,1| H' |2,0,0> = -(1/2) sqrt(2)
    EXPECT_NEAR(h.element(h.index_of({0, 0, 1}), h.index_of({2, 0, 0})), -std::sqrt(0.5), 1e-15);
}

TEST(SparseHamiltonian, AntisymmetricAndConserving) {
    for (auto kind : {HamiltonianKind::Trilinear, HamiltonianKind::Transformed}) {
        const SparseHamiltonian h = build_sparse_hamiltonian(kind, 5, 4);
        const Eigen::MatrixXd m(h.matrix());
        EXPECT_LT((m + m.transpose()).cwiseAbs().maxCoeff(), 1e-15);
        for (const auto& e : h.entries()) {
            const Ket3 r = h.basis()[static_cast<std::size_t>(e.row)], c = h.basis()[static_cast<std::size_t>(e.col)];
            EXPECT_EQ(r[0] + r[1] + 2 * r[2], c[0] + c[1] + 2 * c[2]);
            if (kind == HamiltonianKind::Trilinear) {
                EXPECT_EQ(r[0] + r[2], c[0] + c[2]);
                EXPECT_EQ(r[0] - r[1], c[0] - c[1]);
            } else {
                EXPECT_EQ(r[0] % 2, c[0] % 2);
                EXPECT_EQ(r[1] % 2, c[1] % 2);
            }
        }
    }
}

TEST(SparseHamiltonian, BasisOverflowAndCeiling) {
    EXPECT_THROW(truncated_basis(HamiltonianKind::Transformed, 10, 10, 50), BasisOverflow);
    EXPECT_THROW(build_sparse_hamiltonian(HamiltonianKind::Trilinear, TruncationSpec::fixed(50, 1.0, 40)), TruncationTooTight);
    EXPECT_THROW(build_sparse_hamiltonian(HamiltonianKind::Trilinear, TruncationSpec::automatic(1e-8)), ValidationError);
}

TEST(ExpmAction, ZeroTauAndRotation) {
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Trilinear, 2, 2);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(h.dimension());
    e(h.index_of({1, 1, 0})) = 1.0;
    EXPECT_EQ(expm_action(h, e, 0.0), e);
    const double tau = 0.4;
    const Eigen::VectorXcd out = expm_action(h, e, tau);
    // sector (1,1) ladder is a plain rotation
    EXPECT_NEAR(out(h.index_of({1, 1, 0})).real(), std::cos(tau), 1e-13);
    EXPECT_NEAR(out(h.index_of({0, 0, 1})).real(), std::sin(tau), 1e-13);
    EXPECT_NEAR(out.norm(), 1.0, 1e-14);
}

TEST(ExpmAction, TransformedMatchesDenseOracle) {
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Transformed, 3, 3);
    std::vector<Occupation> basis;
    for (const auto& k : h.basis()) basis.push_back(to_occ(k));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dimension());
    v(h.index_of({2, 2, 0})) = cplx(0.6, 0.0);
    v(h.index_of({3, 1, 0})) = cplx(0.0, 0.8);
    for (double tau : {0.1, 1.0}) {
        const FockState got = sparse_vector_to_fock(h, expm_action(h, v, tau));
        const FockState ref = oracle::dense_evolve(sparse_vector_to_fock(h, v), basis, tau, oracle::apply_transformed);
        EXPECT_LT(oracle::distance(got, ref), 1e-10);
    }
}

TEST(ExpmAction, KrylovAgreesWithDense) {
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Transformed, 8, 8);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dimension());
    for (int i = 0; i < h.dimension(); i += 7) v(i) = cplx(std::sin(i), std::cos(3.0 * i));
    v.normalize();
    ExpmOptions krylov;
    krylov.dense_threshold = 2;
    krylov.krylov_dim = 12;
    krylov.tolerance = 1e-12;
    ExpmOptions dense;
    dense.dense_threshold = 1 << 20;
    for (double tau : {0.05, 0.8}) {
        const Eigen::VectorXcd a = expm_action(h, v, tau, krylov), b = expm_action(h, v, tau, dense);
        EXPECT_LT((a - b).norm(), 1e-9);
        EXPECT_NEAR(a.norm(), 1.0, 1e-10);
    }
}

TEST(ExpmAction, IterationBoundRaisesConvergenceFailure) {
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Transformed, 10, 10);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(h.dimension()).normalized();
    ExpmOptions opt;
    opt.dense_threshold = 2;
    opt.krylov_dim = 4;
    opt.max_matvecs = 8;
    EXPECT_THROW(expm_action(h, v, 5.0, opt), ConvergenceFailure);
}

TEST(ExpmAction, TrilinearSparseAgreesWithSectorEvolution) {
    const SqueezeParams p(0.5, 0.0);
    const SystemState s = build_initial_state(p, p, TruncationSpec::fixed(5, 1.0));
    // project the idlers: the (n, n') = (3, 2) sector has s1 + b = 3, s2 + b = 2
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Trilinear, 5, 5);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dimension());
    v(h.index_of({3, 2, 0})) = 1.0;
    const Eigen::VectorXcd out = expm_action(h, v, 0.3);
    const SystemState t = evolve(s, 0.3);
    const auto& ladder = t.sector(3, 2).amplitudes;
    for (int j = 0; j <= 2; ++j) EXPECT_NEAR(std::abs(out(h.index_of({3 - j, 2 - j, j})) - ladder(j)), 0.0, 1e-12);
}

TEST(ExpmAction, KrylovFinishesRoundingRemainder) {
    // many substeps whose sum falls one ulp short of tau must still terminate
    const SparseHamiltonian h = build_sparse_hamiltonian(HamiltonianKind::Transformed, 8, 8);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dimension());
    for (int i = 0; i < h.dimension(); i += 7) v(i) = cplx(std::sin(i), std::cos(3.0 * i));
    v.normalize();
    ExpmOptions krylov;
    krylov.dense_threshold = 2;
    krylov.krylov_dim = 12;
    ExpmOptions dense;
    dense.dense_threshold = 1 << 20;
    for (double tau : {0.8, 3.0}) EXPECT_LT((expm_action(h, v, tau, krylov) - expm_action(h, v, tau, dense)).norm(), 1e-8);
}
