// test_swap.cpp — beamsplitter, transformed evolution, heralding and the swap experiment
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "trilinear/dynamics.hpp"
#include "trilinear/entanglement.hpp"
#include "trilinear/swap.hpp"

using namespace trilinear;

namespace {

constexpr double kBalanced = std::numbers::pi / 2.0;

// Closed basis of the trilinear generator for signals with s1 + s2 <= 2k
// after mixing, idlers up to k.
std::vector<Occupation> trilinear_box(int k) {
    std::vector<Occupation> basis;
    const int top = 2 * k;
    for (int i1 = 0; i1 <= k; ++i1)
        for (int i2 = 0; i2 <= k; ++i2)
            for (int s1 = 0; s1 <= top; ++s1)
                for (int s2 = 0; s2 <= top; ++s2)
                    for (int b = 0; b <= top; ++b)
                        if (s1 + b <= top && s2 + b <= top) basis.push_back(oracle::ket(s1, s2, b, i1, i2));
    return basis;
}

double max_abs_diff(const DensityMatrix& a, const DensityMatrix& b) {
    const Eigen::MatrixXcd da = a.to_dense(), db = b.to_dense();
    return (da - db).cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------
// Beamsplitter
// ---------------------------------------------------------------------------

TEST(Beamsplitter, ZeroAngleIsIdentity) {
    const Beamsplitter bs(0.0);
    for (int n = 0; n <= 8; ++n) EXPECT_LT((bs.unitary(n) - Eigen::MatrixXd::Identity(n + 1, n + 1)).norm(), 1e-14);
    const SystemState init = build_initial_state(1.0, 0.5, TruncationSpec::automatic(1e-8));
    EXPECT_LT(oracle::distance(apply_beamsplitter(init, 0.0), init.to_fock()), 1e-14);
}

TEST(Beamsplitter, SinglePhotonAtBalancedPoint) {
    // |1,0> -> (|1,0> - |0,1>)/sqrt 2; column entries are ordered by the s1 count
    const Eigen::VectorXd col = Beamsplitter(kBalanced).column(1, 1);
    EXPECT_NEAR(col(1), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(col(0), -1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Beamsplitter, MatchesBinomialExpansion) {
    for (double theta : {0.3, kBalanced, 2.1, std::numbers::pi}) {
        const Beamsplitter bs(theta);
        for (int n = 0; n <= 10; ++n) {
            const Eigen::MatrixXd& u = bs.unitary(n);
            for (int j = 0; j <= n; ++j)
                for (int k = 0; k <= n; ++k) EXPECT_NEAR(u(j, k), oracle::beamsplitter_element(n, j, k, theta), 1e-11);
        }
    }
}

TEST(Beamsplitter, IsOrthogonalAndInvertedByNegativeAngle) {
    for (double theta : {0.4, kBalanced, 2.5}) {
        for (int n = 0; n <= 12; ++n) {
            const Eigen::MatrixXd u = Beamsplitter(theta).unitary(n);
            EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(n + 1, n + 1)).norm(), 1e-12);
            EXPECT_LT((Beamsplitter(-theta).unitary(n) * u - Eigen::MatrixXd::Identity(n + 1, n + 1)).norm(), 1e-12);
        }
    }
}

TEST(Beamsplitter, ConservesSignalPhotonNumberAndNorm) {
    const SystemState init = build_initial_state(1.5, 0.5, TruncationSpec::automatic(1e-8));
    const FockState out = apply_beamsplitter(init, 1.1);
    EXPECT_NEAR(out.norm_squared(), init.norm_squared(), 1e-12);
    const FockState in = init.to_fock();
    const double before = in.expectation_number(Mode::S1) + in.expectation_number(Mode::S2);
    const double after = out.expectation_number(Mode::S1) + out.expectation_number(Mode::S2);
    EXPECT_NEAR(after, before, 1e-10);
    for (const auto& [occ, a] : out.terms()) {
        // mixing keeps the per-term total tied to the idlers: s1 + s2 = i1 + i2
        EXPECT_EQ(occ[index_of(Mode::S1)] + occ[index_of(Mode::S2)], occ[index_of(Mode::I1)] + occ[index_of(Mode::I2)]);
    }
}

TEST(Beamsplitter, RequiresInitialState) {
    const SystemState st = evolve(build_initial_state(0.5, 0.5, TruncationSpec::automatic(1e-8)), 0.1);
    EXPECT_THROW(apply_beamsplitter(st, kBalanced), ValidationError);
    EXPECT_THROW(Beamsplitter(1.0).apply(st.to_fock(), Mode::S1, Mode::S1), InvalidSubsystem);
    EXPECT_THROW(Beamsplitter(1.0).unitary(-1), ValidationError);
}

TEST(Beamsplitter, MixingMakesSignalIdlerPairMixed) {
    const SystemState init = build_initial_state(1.0, 1.0, TruncationSpec::automatic(1e-10));
    const auto cut = state_cutoffs(init);
    const ModeSet si{Mode::S1, Mode::I1};
    EXPECT_NEAR(purity(partial_trace(apply_beamsplitter(init, 0.0), si, cut)), 1.0, 1e-10);
    const FockState mixed = apply_beamsplitter(init, kBalanced);
    Occupation wide = cut;
    wide[index_of(Mode::S1)] = wide[index_of(Mode::S2)] = cut[index_of(Mode::S1)] + cut[index_of(Mode::S2)];
    EXPECT_LT(purity(partial_trace(mixed, si, wide)), 0.99);
}

TEST(Beamsplitter, CreatesNoIdlerOrSignalPairEntanglement) {
    // a truncated thermal marginal is not classical; its tail leaks ~1e-10 s1;s2 negativity at eps = 1e-6
    const SystemState init = build_initial_state(0.8, 0.8, TruncationSpec::automatic(1e-8));
    for (double theta : {0.0, 0.5, kBalanced, 2.0, std::numbers::pi}) {
        const FockState out = apply_beamsplitter(init, theta);
        EXPECT_LT(bipartite_negativity(out, ModeSet{Mode::I1}, ModeSet{Mode::I2}).negativity, 1e-10) << theta;
        EXPECT_LT(bipartite_negativity(out, ModeSet{Mode::S1}, ModeSet{Mode::S2}).negativity, 1e-10) << theta;
    }
}

TEST(Reflectivity, Conventions) {
    EXPECT_NEAR(reflectivity(0.0), 0.0, 1e-15);
    EXPECT_NEAR(reflectivity(kBalanced), 0.5, 1e-15);
    EXPECT_NEAR(reflectivity_quarter_angle(kBalanced), std::pow(std::sin(std::numbers::pi / 8.0), 2), 1e-15);
    EXPECT_NEAR(reflectivity_quarter_angle(std::numbers::pi), 0.5, 1e-15);
    for (double r : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        EXPECT_NEAR(reflectivity(theta_for_reflectivity(r)), r, 1e-14);
        EXPECT_NEAR(reflectivity_quarter_angle(theta_for_reflectivity_quarter_angle(r)), r, 1e-14);
    }
    // matrix reflectivity equals the single-photon transfer probability
    const double theta = 0.9;
    EXPECT_NEAR(std::pow(Beamsplitter(theta).column(1, 1)(0), 2), reflectivity(theta), 1e-14);
    EXPECT_THROW(theta_for_reflectivity(1.5), ValidationError);
    EXPECT_THROW(theta_for_reflectivity_quarter_angle(-0.1), ValidationError);
}

// ---------------------------------------------------------------------------
// Covariance after balanced mixing
// ---------------------------------------------------------------------------

TEST(MixedCovariance, EqualMeansGiveZero) {
    const SystemState init = build_initial_state(1.0, 1.0, TruncationSpec::automatic(1e-12, 160));
    const FockState out = apply_beamsplitter(init, kBalanced);
    EXPECT_NEAR(quadrature_covariance(out, Mode::S1, Mode::S2, Quadrature::X), 0.0, 1e-8);
    EXPECT_NEAR(quadrature_covariance(out, Mode::S1, Mode::S2, Quadrature::Y), 0.0, 1e-8);
}

TEST(MixedCovariance, MagnitudeEqualsMeanDifference) {
    const SystemState init = build_initial_state(1.5, 0.5, TruncationSpec::automatic(1e-12, 160));
    const FockState out = apply_beamsplitter(init, kBalanced);
    // quadratures X = (a + a^dag)/2
    EXPECT_NEAR(std::abs(quadrature_covariance(out, Mode::S1, Mode::S2, Quadrature::X)), 1.0, 1e-8);
}

TEST(MixedCovariance, UnitQuadraturesGiveMeanDifference) {
    const SystemState init = build_initial_state(1.5, 0.5, TruncationSpec::automatic(1e-12, 160));
    const FockState out = apply_beamsplitter(init, kBalanced);
    for (auto q : {Quadrature::X, Quadrature::Y}) {
        EXPECT_NEAR(std::abs(quadrature_covariance(out, Mode::S1, Mode::S2, q, QuadratureScale::Unit)), 1.0, 1e-8);
        EXPECT_NEAR(std::abs(quadrature_covariance(out, Mode::S1, Mode::S2, q)), 0.25, 1e-8);
    }
}

// ---------------------------------------------------------------------------
// Transformed evolution
// ---------------------------------------------------------------------------

TEST(TransformedEvolver, EqualsConjugatedTrilinearEvolution) {
    const SystemState init = build_initial_state(0.2, 0.3, TruncationSpec::fixed(2, 2e-2));
    const FockState mixed = Beamsplitter(kBalanced).apply(init.to_fock());
    const TransformedEvolver ev(2, 2);
    for (double tau : {0.05, 0.7, 1.5}) {
        const FockState lab = oracle::dense_evolve(mixed, trilinear_box(2), tau, oracle::apply_trilinear);
        EXPECT_LT(oracle::distance(Beamsplitter(-kBalanced).apply(lab), ev.evolve(init, tau)), 1e-9) << tau;
    }
}

TEST(TransformedEvolver, ConservesNormAndWeightedNumber) {
    const SystemState init = build_initial_state(1.0, 1.0, TruncationSpec::automatic(1e-6));
    const TransformedEvolver ev(init.n_max1(), init.n_max2());
    const FockState f0 = init.to_fock();
    auto weighted = [](const FockState& f) {
        return f.expectation_number(Mode::S1) + f.expectation_number(Mode::S2) + 2.0 * f.expectation_number(Mode::B);
    };
    for (double tau : {0.1, 0.5, 1.0}) {
        const FockState f = ev.evolve(init, tau);
        EXPECT_NEAR(f.norm_squared(), f0.norm_squared(), 1e-9);
        EXPECT_NEAR(weighted(f), weighted(f0), 1e-9);
    }
}

TEST(TransformedEvolver, RejectsEvolvedInput) {
    const SystemState st = evolve(build_initial_state(0.5, 0.5, TruncationSpec::automatic(1e-6)), 0.1);
    EXPECT_THROW(TransformedEvolver(st.n_max1(), st.n_max2()).evolve(st, 0.1), ValidationError);
}

// ---------------------------------------------------------------------------
// Heralding
// ---------------------------------------------------------------------------

TEST(Herald, VacuumShModeHasZeroProbability) {
    const SystemState init = build_initial_state(1.0, 1.0, TruncationSpec::automatic(1e-8));
    for (auto p : {Projector::Click, Projector::OnePNR}) {
        EXPECT_EQ(herald_probability(init.to_fock(), p), 0.0);
        EXPECT_THROW(herald(init, p), ZeroProbability);
    }
}

TEST(Herald, ProjectorsAcceptExpectedCounts) {
    EXPECT_FALSE(projector_accepts(Projector::Click, 0));
    EXPECT_TRUE(projector_accepts(Projector::Click, 3));
    EXPECT_TRUE(projector_accepts(Projector::OnePNR, 1));
    EXPECT_FALSE(projector_accepts(Projector::OnePNR, 2));
}

TEST(Herald, ClickDominatesOnePnr) {
    const SystemState init = build_initial_state(1.5, 1.5, TruncationSpec::automatic(1e-6));
    const TransformedEvolver ev(init.n_max1(), init.n_max2());
    for (double tau : {0.01, 0.05, 0.1, 0.3, 0.6}) {
        const FockState f = ev.evolve(init, tau);
        EXPECT_GE(herald_probability(f, Projector::Click), herald_probability(f, Projector::OnePNR)) << tau;
    }
}

TEST(Herald, PostStateIsNormalizedIdlerState) {
    const SystemState init = build_initial_state(1.0, 1.0, TruncationSpec::automatic(1e-6));
    const FockState f = TransformedEvolver(init.n_max1(), init.n_max2()).evolve(init, 0.2);
    const HeraldOutcome h = herald(f, Projector::OnePNR);
    EXPECT_GT(h.probability, 0.0);
    EXPECT_LE(h.probability, 1.0);
    EXPECT_NEAR(h.post_state.trace().real(), 1.0, 1e-12);
    EXPECT_LT(h.post_state.hermiticity_error(), 1e-12);
    EXPECT_EQ(h.post_state.modes(), (ModeSet{Mode::I1, Mode::I2}));
}

TEST(Herald, ClickAndOnePnrAgreeAtSmallTau) {
    const SystemState init = build_initial_state(2.5, 2.5, TruncationSpec::automatic(1e-6, 80));
    const TransformedEvolver ev(init.n_max1(), init.n_max2());
    for (double tau : {0.002, 0.005, 0.01}) {
        const FockState f = ev.evolve(init, tau);
        const HeraldOutcome click = herald(f, Projector::Click), one = herald(f, Projector::OnePNR);
        EXPECT_NEAR(click.probability, one.probability, 1e-6) << tau;
        EXPECT_LT(max_abs_diff(click.post_state, one.post_state), 1e-6) << tau;
    }
}

TEST(Herald, ProbabilityReachesPerMilleScale) {
    // sweep for the first tau whose 1-PNR probability reaches 1e-3 and check it stays small-tau
    const SystemState init = build_initial_state(2.5, 2.5, TruncationSpec::automatic(1e-6, 80));
    const TransformedEvolver ev(init.n_max1(), init.n_max2());
    double prev = 0.0, found = -1.0;
    for (int k = 1; k <= 40 && found < 0.0; ++k) {
        const double tau = 0.001 * k;
        const double p = herald_probability(ev.evolve(init, tau), Projector::OnePNR);
        EXPECT_GT(p, prev);
        prev = p;
        if (p >= 1e-3) found = tau;
    }
    ASSERT_GT(found, 0.0);
    EXPECT_LT(found, 0.02);
    EXPECT_LT(prev, 1e-2);
}

// ---------------------------------------------------------------------------
// swap_experiment
// ---------------------------------------------------------------------------

TEST(SwapExperiment, ZeroTauRowIsZeroAndHeraldedEntanglementForms) {
    SwapOptions opt;
    opt.truncation = TruncationSpec::automatic(1e-6, 80);
    const auto rows = swap_experiment(2.5, {0.0, 0.002, 0.01, 0.05}, opt);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].log_neg_click, 0.0);
    EXPECT_EQ(rows[0].log_neg_1pnr, 0.0);
    EXPECT_EQ(rows[0].prob_click, 0.0);
    EXPECT_EQ(rows[0].prob_1pnr, 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].log_neg_1pnr, 0.0) << rows[i].tau;
        EXPECT_GT(rows[i].log_neg_click, 0.0) << rows[i].tau;
        EXPECT_GE(rows[i].prob_click, rows[i].prob_1pnr);
    }
}

TEST(SwapExperiment, MatchesDirectHeralding) {
    SwapOptions opt;
    opt.truncation = TruncationSpec::automatic(1e-4, 80);
    const auto rows = swap_experiment(1.0, 0.5, {0.1}, opt);
    const SystemState init = build_initial_state(1.0, 0.5, opt.truncation);
    const FockState f = TransformedEvolver(init.n_max1(), init.n_max2()).evolve(init, 0.1);
    const HeraldOutcome h = herald(f, Projector::OnePNR);
    EXPECT_NEAR(rows[0].prob_1pnr, h.probability, 1e-14);
    EXPECT_NEAR(rows[0].log_neg_1pnr, heralded_idler_negativity(h).log_negativity, 1e-12);
}

TEST(SwapExperiment, RejectsUnsortedGrid) {
    EXPECT_THROW(swap_experiment(1.0, {0.1, 0.05}), ValidationError);
}

TEST(SwapExperiment, WithoutMixingOnePnrHeraldsMarginalIdlerEntanglement) {
    // plain trilinear evolution, no beamsplitter, low mean photon number
    const SystemState init = build_initial_state(0.5, 0.5, TruncationSpec::automatic(1e-8));
    const TrilinearEvolver ev(init);
    for (double tau : {0.01, 0.05}) {
        const SystemState st = ev.evolve(init, tau);
        const HeraldOutcome h = herald(st, Projector::OnePNR);
        EXPECT_LT(h.probability, 1e-2) << tau;
        EXPECT_GT(heralded_idler_negativity(h).log_negativity, 0.0) << tau;
    }
}
