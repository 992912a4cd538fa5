// runner.hpp — runs experiment configs into result records, with caching and a truncation guard
//
// Every grid-based experiment reruns its final grid point with both cutoffs
// raised by two and compares the headline quantity; a shift of at least
// guard_tolerance marks the record as not converged.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "../dynamics.hpp"
#include "../entanglement.hpp"
#include "../parallel.hpp"
#include "../perturbation.hpp"
#include "../physical.hpp"
#include "../state.hpp"
#include "../swap.hpp"
#include "cache.hpp"
#include "config.hpp"
#include "record.hpp"

namespace trilinear::experiments {

struct RunOptions {
    const ResultCache* cache = nullptr;
    bool convergence_guard = true;
    double guard_tolerance = 1e-6;
    std::function<void(const std::string&)> log;  // progress messages, optional
};

namespace detail {

inline std::string label_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string en_column(const std::string& partition) { return "EN(" + partition + ")"; }

inline std::string nbar_column(const std::string& prefix, double nbar) { return prefix + " nbar=" + label_number(nbar); }

// Initial state with truncation failures reported against the mean photon numbers.
inline SystemState initial_state(double n1, double n2, const TruncationSpec& trunc) {
    try {
        return build_initial_state(n1, n2, trunc);
    } catch (const TruncationTooTight& e) {
        throw TruncationTooTight("truncation for n_bar_1=" + label_number(n1) + ", n_bar_2=" + label_number(n2) + ": " + e.what());
    }
}

// Both cutoffs two above the larger of the ones actually used.
inline TruncationSpec raised_truncation(const TruncationSpec& t, int n_max1, int n_max2) {
    const int n = std::max(n_max1, n_max2) + 2;
    return TruncationSpec::fixed(n, t.tail_epsilon, std::max(t.ceiling, n));
}

inline json truncation_json(const TruncationSpec& t, int n_max1, int n_max2) {
    return {{"tail_epsilon", t.tail_epsilon}, {"ceiling", t.ceiling}, {"n_max_1", n_max1}, {"n_max_2", n_max2}};
}

struct GuardResult {
    bool converged = true;
    double shift = 0.0;
};

inline GuardResult compare(double base, double raised, double tol) {
    const double shift = std::abs(raised - base);
    return {shift < tol, shift};
}

// Quantities evaluated on an evolved trilinear state.
struct StateQuantity {
    std::string name;
    std::function<double(const SystemState&)> eval;
};

inline StateQuantity partition_quantity(const std::string& text) {
    const Bipartition p = Bipartition::parse(text);
    return {en_column(text), [p](const SystemState& st) { return partition_negativity(st, p).log_negativity; }};
}

inline StateQuantity named_quantity(const std::string& q) {
    if (q == "purity_difference") return {q, [](const SystemState& st) { return purity_difference(st); }};
    const auto colon = q.find(':');
    const std::string head = q.substr(0, colon);
    const Mode m = parse_mode(q.substr(colon + 1));
    if (head == "mean") return {q, [m](const SystemState& st) { return st.to_fock().expectation_number(m) / st.norm_squared(); }};
    return {q, [m](const SystemState& st) {
                const auto dist = number_distribution(st.to_fock(), m);
                double mean = 0.0;
                for (std::size_t n = 0; n < dist.size(); ++n) mean += static_cast<double>(n) * dist[n];
                return mean > 0.0 ? mandel_q(dist) : std::nan("");
            }};
}

// Evaluates quantities over a tau grid of one trilinear run.
inline std::vector<std::vector<double>> sweep(const SystemState& init, const TrilinearEvolver& ev, const std::vector<double>& grid,
                                              const std::vector<StateQuantity>& qs, unsigned workers) {
    std::vector<std::vector<double>> out(qs.size(), std::vector<double>(grid.size()));
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        const SystemState st = ev.evolve(init, grid[i]);
        for (std::size_t k = 0; k < qs.size(); ++k) out[k][i] = qs[k].eval(st);
    });
    return out;
}

inline double evaluate_at(double n1, double n2, const TruncationSpec& t, double tau, const StateQuantity& q) {
    const SystemState init = initial_state(n1, n2, t);
    const TrilinearEvolver ev(init);
    return q.eval(ev.evolve(init, tau));
}

}  // namespace detail

class Runner {
public:
    explicit Runner(RunOptions opt = {}) : opt_(std::move(opt)) {}

    ResultRecord run(const ExperimentConfig& cfg, bool* cache_hit = nullptr) const {
        cfg.validate();
        const std::string key = cache_key(cfg);
        if (cache_hit) *cache_hit = false;
        if (opt_.cache) {
            if (auto hit = opt_.cache->load(key)) {
                if (cache_hit) *cache_hit = true;
                return *hit;
            }
        }
        const auto t0 = std::chrono::steady_clock::now();
        ResultRecord rec;
        rec.config_hash = key;
        rec.experiment = to_string(cfg.experiment);
        rec.metadata["config"] = cfg.to_json(false);
        switch (cfg.experiment) {
            case Experiment::Fig2: fig2(cfg, rec); break;
            case Experiment::Fig3:
            case Experiment::Custom: state_sweep(cfg, rec); break;
            case Experiment::Trend: trend(cfg, rec); break;
            case Experiment::Purity: purity(cfg, rec); break;
            case Experiment::Swap: swap(cfg, rec); break;
            case Experiment::Kappa: kappa(cfg, rec); break;
            case Experiment::Beamsplitter: beamsplitter(cfg, rec); break;
        }
        rec.metadata["tool_version"] = kToolVersion;
        rec.metadata["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!rec.metadata.contains("converged")) rec.metadata["converged"] = true;
        if (opt_.cache) opt_.cache->store(rec);
        return rec;
    }

private:
    void log(const std::string& m) const {
        if (opt_.log) opt_.log(m);
    }

    void set_guard(ResultRecord& rec, const detail::GuardResult& g, const std::string& headline) const {
        rec.metadata["converged"] = g.converged;
        rec.metadata["convergence_shift"] = g.shift;
        rec.metadata["guard_tolerance"] = opt_.guard_tolerance;
        rec.metadata["headline"] = headline;
        if (!g.converged) log("convergence guard: '" + headline + "' shifted by " + detail::label_number(g.shift));
    }

    void fig2(const ExperimentConfig& cfg, ResultRecord& rec) const {
        const auto grid = cfg.tau_grid();
        const SystemState init = detail::initial_state(cfg.n_bar_1, cfg.n_bar_2, cfg.truncation);
        const TrilinearEvolver ev(init);
        const auto exact_q = detail::partition_quantity("i1i2;b");
        log("fig2: exact evolution, n_max=" + std::to_string(init.n_max1()));
        auto exact = detail::sweep(init, ev, grid, {exact_q}, cfg.workers);
        const InitialCoefficients c(init.params1(), init.params2(), cfg.truncation);
        log("fig2: first-order perturbation");
        std::vector<double> pert(grid.size()), cross(grid.size());
        parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
            const double tau = grid[i];
            pert[i] = tau == 0.0 ? 0.0 : negativity_from_spectrum(reduced_pt_first_order(c, tau).eigenvalues()).log_negativity;
            if (cfg.cross_terms) {
                cross[i] = tau == 0.0 ? 0.0
                                      : negativity_from_spectrum(reduced_pt_first_order(c, tau, {true}).eigenvalues()).log_negativity;
            }
        });
        rec.add_column("tau", grid);
        rec.add_column("EN_exact(i1i2;b)", exact[0]);
        rec.add_column("EN_pert1(i1i2;b)", pert);
        Panel p{"i1i2;b log-negativity: exact vs first order", "tau", {"EN_exact(i1i2;b)", "EN_pert1(i1i2;b)"}, "log-negativity"};
        if (cfg.cross_terms) {
            rec.add_column("EN_pert1_cross(i1i2;b)", cross);
            p.series.push_back("EN_pert1_cross(i1i2;b)");
        }
        rec.panels.push_back(p);
        rec.metadata["truncation"] = detail::truncation_json(cfg.truncation, init.n_max1(), init.n_max2());
        if (opt_.convergence_guard) {
            const auto t = detail::raised_truncation(cfg.truncation, init.n_max1(), init.n_max2());
            const double raised = detail::evaluate_at(cfg.n_bar_1, cfg.n_bar_2, t, grid.back(), exact_q);
            set_guard(rec, detail::compare(exact[0].back(), raised, opt_.guard_tolerance), "EN_exact(i1i2;b)");
        }
    }

    // fig3 and custom: quantities of the trilinear state over the tau grid.
    void state_sweep(const ExperimentConfig& cfg, ResultRecord& rec) const {
        const auto grid = cfg.tau_grid();
        std::vector<detail::StateQuantity> qs;
        for (const auto& p : cfg.partitions) qs.push_back(detail::partition_quantity(p));
        for (const auto& q : cfg.quantities) qs.push_back(detail::named_quantity(q));
        const SystemState init = detail::initial_state(cfg.n_bar_1, cfg.n_bar_2, cfg.truncation);
        const TrilinearEvolver ev(init);
        log(to_string(cfg.experiment) + ": " + std::to_string(grid.size()) + " points, n_max=" + std::to_string(init.n_max1()) + "/" +
            std::to_string(init.n_max2()));
        const auto cols = detail::sweep(init, ev, grid, qs, cfg.workers);
        rec.add_column("tau", grid);
        Panel en{"log-negativity by bipartition", "tau", {}, "log-negativity"};
        Panel other{"state quantities", "tau", {}, "value"};
        for (std::size_t k = 0; k < qs.size(); ++k) {
            rec.add_column(qs[k].name, cols[k]);
            (k < cfg.partitions.size() ? en : other).series.push_back(qs[k].name);
        }
        if (!en.series.empty()) rec.panels.push_back(en);
        if (!other.series.empty()) rec.panels.push_back(other);
        rec.metadata["truncation"] = detail::truncation_json(cfg.truncation, init.n_max1(), init.n_max2());
        if (opt_.convergence_guard) {
            const auto t = detail::raised_truncation(cfg.truncation, init.n_max1(), init.n_max2());
            const double raised = detail::evaluate_at(cfg.n_bar_1, cfg.n_bar_2, t, grid.back(), qs.front());
            set_guard(rec, detail::compare(cols.front().back(), raised, opt_.guard_tolerance), qs.front().name);
        }
    }

    // One trilinear run per mean photon number; per-series guards.
    void per_nbar(const ExperimentConfig& cfg, ResultRecord& rec, const std::string& prefix, const detail::StateQuantity& q,
                  const std::string& title, const std::string& y_label, std::vector<double>* at_tau_star) const {
        const auto grid = cfg.tau_grid();
        rec.add_column("tau", grid);
        Panel p{title, "tau", {}, y_label};
        json truncs = json::object(), series_ok = json::object(), shifts = json::object();
        bool all_ok = true;
        double worst = 0.0;
        for (double nbar : cfg.n_bar_values) {
            const SystemState init = detail::initial_state(nbar, nbar, cfg.truncation);
            const TrilinearEvolver ev(init);
            const std::string name = detail::nbar_column(prefix, nbar);
            log(to_string(cfg.experiment) + ": " + name + ", n_max=" + std::to_string(init.n_max1()));
            auto col = detail::sweep(init, ev, grid, {q}, cfg.workers)[0];
            if (at_tau_star) {
                std::size_t hit = grid.size();
                for (std::size_t i = 0; i < grid.size(); ++i)
                    if (grid[i] == cfg.tau_star) hit = i;
                at_tau_star->push_back(hit < grid.size() ? col[hit] : q.eval(ev.evolve(init, cfg.tau_star)));
            }
            truncs[name] = detail::truncation_json(cfg.truncation, init.n_max1(), init.n_max2());
            if (opt_.convergence_guard) {
                const auto t = detail::raised_truncation(cfg.truncation, init.n_max1(), init.n_max2());
                const auto g = detail::compare(col.back(), detail::evaluate_at(nbar, nbar, t, grid.back(), q), opt_.guard_tolerance);
                series_ok[name] = g.converged;
                shifts[name] = g.shift;
                all_ok = all_ok && g.converged;
                worst = std::max(worst, g.shift);
            }
            rec.add_column(name, std::move(col));
            p.series.push_back(name);
        }
        rec.panels.push_back(p);
        rec.metadata["truncation"] = truncs;
        if (opt_.convergence_guard) {
            set_guard(rec, {all_ok, worst}, q.name);
            rec.metadata["series_converged"] = series_ok;
            rec.metadata["series_shift"] = shifts;
        }
    }

    void trend(const ExperimentConfig& cfg, ResultRecord& rec) const {
        std::vector<double> star;
        per_nbar(cfg, rec, "EN(i1i2;b)", detail::partition_quantity("i1i2;b"), "i1i2;b log-negativity for several mean photon numbers",
                 "log-negativity", &star);
        rec.metadata["tau_star"] = {{"tau", cfg.tau_star}, {"n_bar", cfg.n_bar_values}, {"log_negativity", star}};
    }

    void purity(const ExperimentConfig& cfg, ResultRecord& rec) const {
        per_nbar(cfg, rec, "purity_difference", detail::named_quantity("purity_difference"),
                 "purity(i1 i2 b) - purity(i1 i2)", "purity difference", nullptr);
    }

    void swap(const ExperimentConfig& cfg, ResultRecord& rec) const {
        const auto grid = cfg.tau_grid();
        SwapOptions so;
        so.truncation = cfg.truncation;
        so.workers = cfg.workers;
        const SystemState probe = detail::initial_state(cfg.n_bar_1, cfg.n_bar_2, cfg.truncation);
        log("swap: transformed evolution, n_max=" + std::to_string(probe.n_max1()) + "/" + std::to_string(probe.n_max2()));
        const auto rows = swap_experiment(cfg.n_bar_1, cfg.n_bar_2, grid, so);
        std::vector<double> en_c, en_1, p_c, p_1;
        for (const auto& r : rows) {
            en_c.push_back(r.log_neg_click);
            en_1.push_back(r.log_neg_1pnr);
            p_c.push_back(r.prob_click);
            p_1.push_back(r.prob_1pnr);
        }
        rec.add_column("tau", grid);
        rec.add_column("EN_click(i1;i2)", en_c);
        rec.add_column("EN_1pnr(i1;i2)", en_1);
        rec.add_column("P_click", p_c);
        rec.add_column("P_1pnr", p_1);
        rec.panels.push_back({"heralded i1;i2 log-negativity", "tau", {"EN_click(i1;i2)", "EN_1pnr(i1;i2)"}, "log-negativity"});
        rec.panels.push_back({"heralding probability", "tau", {"P_click", "P_1pnr"}, "probability"});
        rec.metadata["truncation"] = detail::truncation_json(cfg.truncation, probe.n_max1(), probe.n_max2());
        if (opt_.convergence_guard) {
            SwapOptions raised = so;
            raised.truncation = detail::raised_truncation(cfg.truncation, probe.n_max1(), probe.n_max2());
            const auto r = swap_experiment(cfg.n_bar_1, cfg.n_bar_2, {grid.back()}, raised).front();
            const bool click = cfg.projector == Projector::Click;
            const double base = click ? en_c.back() : en_1.back();
            const double other = click ? r.log_neg_click : r.log_neg_1pnr;
            set_guard(rec, detail::compare(base, other, opt_.guard_tolerance), click ? "EN_click(i1;i2)" : "EN_1pnr(i1;i2)");
        }
    }

    void kappa(const ExperimentConfig& cfg, ResultRecord& rec) const {
        std::vector<double> idx, d, l, s, kg, kv, tau;
        for (double de : cfg.kappa.d_eff)
            for (double len : cfg.kappa.length)
                for (double sig : cfg.kappa.sigma_b) {
                    physical::CrystalParams p;
                    p.d_eff = de, p.length = len, p.sigma_b = sig;
                    p.lambda_b = cfg.kappa.lambda_b;
                    p.n_b = p.n_s1 = p.n_s2 = cfg.kappa.index;
                    p.delta_kz = cfg.kappa.delta_kz;
                    p.pulse_duration = cfg.kappa.pulse_duration;
                    const double k = physical::kappa_gaussian(p);
                    idx.push_back(static_cast<double>(idx.size()));
                    d.push_back(de), l.push_back(len), s.push_back(sig), kg.push_back(k);
                    kv.push_back(physical::kappa_verbose_prefactor(p, physical::gaussian_overlap(p)).real());
                    tau.push_back(k > 0.0 ? physical::tau_physical(k, p.pulse_duration) : 0.0);
                }
        rec.add_column("case", idx);
        rec.add_column("d_eff", d);
        rec.add_column("L_z", l);
        rec.add_column("sigma_b", s);
        rec.add_column("kappa", kg);
        rec.add_column("kappa_verbose", kv);
        rec.add_column("tau", tau);
        rec.panels.push_back({"coupling constant per parameter corner", "case", {"kappa", "kappa_verbose"}, "kappa (1/s)"});
        rec.panels.push_back({"scaled time per parameter corner", "case", {"tau"}, "tau"});
        const auto [kmin, kmax] = std::minmax_element(kg.begin(), kg.end());
        const auto [tmin, tmax] = std::minmax_element(tau.begin(), tau.end());
        rec.metadata["kappa_range"] = {*kmin, *kmax};
        rec.metadata["tau_range"] = {*tmin, *tmax};
        rec.metadata["lambda_b"] = cfg.kappa.lambda_b;
        rec.metadata["index"] = cfg.kappa.index;
        rec.metadata["pulse_duration"] = cfg.kappa.pulse_duration;
    }

    // Purities of two-mode reductions after mixing the signals at angle theta, before any interaction.
    void beamsplitter(const ExperimentConfig& cfg, ResultRecord& rec) const {
        const auto grid = cfg.theta_grid();
        static const std::vector<std::string> pairs = {"s1i1", "s2i2", "s1i2", "s2i1", "s1s2", "i1i2"};
        auto purities = [&](const SystemState& init, double theta) {
            const FockState psi = apply_beamsplitter(init, theta);
            const auto cut = state_cutoffs(init);
            Occupation c = cut;
            c[index_of(Mode::S1)] = c[index_of(Mode::S2)] = init.n_max1() + init.n_max2();
            std::vector<double> out;
            for (const auto& p : pairs) out.push_back(trilinear::purity(partial_trace(psi, ModeSet::parse(p), c)));
            return out;
        };
        const SystemState init = detail::initial_state(cfg.n_bar_1, cfg.n_bar_2, cfg.truncation);
        std::vector<std::vector<double>> cols(pairs.size(), std::vector<double>(grid.size()));
        parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
            const auto v = purities(init, grid[i]);
            for (std::size_t k = 0; k < pairs.size(); ++k) cols[k][i] = v[k];
        });
        std::vector<double> r_matrix, r_quarter;
        for (double t : grid) {
            r_matrix.push_back(reflectivity(t));
            r_quarter.push_back(reflectivity_quarter_angle(t));
        }
        rec.add_column("theta", grid);
        rec.add_column("R", r_matrix);
        rec.add_column("R_quarter_angle", r_quarter);
        Panel p{"purity of two-mode reductions after signal mixing", "theta", {}, "purity"};
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            rec.add_column("purity(" + pairs[k] + ")", cols[k]);
            p.series.push_back("purity(" + pairs[k] + ")");
        }
        rec.panels.push_back(p);
        rec.metadata["truncation"] = detail::truncation_json(cfg.truncation, init.n_max1(), init.n_max2());
        if (opt_.convergence_guard) {
            const auto t = detail::raised_truncation(cfg.truncation, init.n_max1(), init.n_max2());
            const SystemState big = detail::initial_state(cfg.n_bar_1, cfg.n_bar_2, t);
            const double raised = purities(big, grid.back()).front();
            set_guard(rec, detail::compare(cols.front().back(), raised, opt_.guard_tolerance), "purity(s1i1)");
        }
    }

    RunOptions opt_;
};

inline ResultRecord run(const ExperimentConfig& cfg, const RunOptions& opt = {}, bool* cache_hit = nullptr) {
    return Runner(opt).run(cfg, cache_hit);
}

struct BatchItem {
    std::optional<ResultRecord> record;
    std::string error;
    bool cache_hit = false;
};

// Runs independent configs from a shared work queue on up to `workers` threads.
inline std::vector<BatchItem> run_batch(const std::vector<ExperimentConfig>& configs, const RunOptions& opt, unsigned workers) {
    std::vector<BatchItem> out(configs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        const Runner runner(opt);
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                out[i].record = runner.run(configs[i], &out[i].cache_hit);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace trilinear::experiments
