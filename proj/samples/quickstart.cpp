// quickstart.cpp — evolve twin TMSVS seeds under SHG and print entanglement across the main cuts
#include <cstdio>

#include "trilinear/dynamics.hpp"
#include "trilinear/entanglement.hpp"
#include "trilinear/perturbation.hpp"
#include "trilinear/swap.hpp"

using namespace trilinear;

int main() {
    const double nbar = 1.5;
    const TruncationSpec trunc = TruncationSpec::automatic(1e-8, 80);
    const SystemState init = build_initial_state(nbar, nbar, trunc);
    const TrilinearEvolver ev(init);
    const InitialCoefficients coeffs(init.params1(), init.params2(), trunc);
    std::printf("nbar=%.2f  n_max=%d\n", nbar, init.n_max1());
    std::printf("%6s %12s %12s %12s %12s %12s\n", "tau", "EN(i1i2;b)", "EN pert1", "EN(s1;i1)", "EN(i1;i2)", "purity diff");
    for (double tau : {0.0, 0.01, 0.02, 0.04, 0.1, 0.2, 0.4}) {
        const SystemState s = ev.evolve(init, tau);
        const double pert = perturbative_log_negativity(coeffs, {tau})[0];
        std::printf("%6.3f %12.6f %12.6f %12.6f %12.2e %12.6f\n", tau, idler_sh_negativity(s).log_negativity, pert,
                    partition_negativity(s, Bipartition::parse("s1;i1")).log_negativity,
                    bipartite_negativity(s, ModeSet{Mode::I1}, ModeSet{Mode::I2}).log_negativity, purity_difference(s));
    }

    // heralded idler-idler entanglement after mixing the signals on a balanced splitter
    const SystemState seed = build_initial_state(2.5, 2.5, TruncationSpec::automatic(1e-6, 80));
    const TransformedEvolver mixed(seed.n_max1(), seed.n_max2());
    std::printf("\nheralding at nbar=2.5\n%6s %12s %12s\n", "tau", "P(1 photon)", "EN(i1;i2)");
    for (double tau : {0.005, 0.01, 0.02}) {
        const HeraldOutcome h = herald(mixed.evolve(seed, tau), Projector::OnePNR);
        std::printf("%6.3f %12.4e %12.6f\n", tau, h.probability, heralded_idler_negativity(h).log_negativity);
    }
    return 0;
}
