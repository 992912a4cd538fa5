// snapshot.hpp — JSON snapshot of a sector-decomposed state
//
// Layout: a header (cutoffs, phase convention tag, squeeze parameters, tau)
// followed by one entry per sector with its label, weight and ladder
// amplitudes, complex numbers written as [re, im] pairs.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "state.hpp"

namespace trilinear {

inline constexpr const char* kPhaseConvention = "sech(r) (-1)^n exp(2 i n phi) tanh^n(r)";

inline nlohmann::json snapshot_json(const SystemState& st) {
    using nlohmann::json;
    auto pair = [](cplx v) { return json::array({v.real(), v.imag()}); };
    json sectors = json::array();
    for (std::size_t k = 0; k < st.sectors().size(); ++k) {
        const auto& s = st.sectors()[k];
        json amps = json::array();
        for (Eigen::Index j = 0; j < s.amplitudes.size(); ++j) amps.push_back(pair(s.amplitudes(j)));
        sectors.push_back({{"n", s.label.n}, {"n_prime", s.label.n_prime}, {"weight", pair(st.weights()[k])}, {"amplitudes", amps}});
    }
    return {{"convention", kPhaseConvention},
            {"n_max_1", st.n_max1()},
            {"n_max_2", st.n_max2()},
            {"r_1", st.params1().r},
            {"phi_1", st.params1().phi},
            {"r_2", st.params2().r},
            {"phi_2", st.params2().phi},
            {"tau", st.tau()},
            {"sectors", sectors}};
}

inline SystemState state_from_snapshot(const nlohmann::json& j) {
    try {
        if (j.at("convention").get<std::string>() != kPhaseConvention) {
            throw ValidationError("snapshot: unsupported phase convention");
        }
        auto value = [](const nlohmann::json& p) { return cplx(p.at(0).get<double>(), p.at(1).get<double>()); };
        const int n1 = j.at("n_max_1").get<int>(), n2 = j.at("n_max_2").get<int>();
        const auto& list = j.at("sectors");
        if (list.size() != static_cast<std::size_t>((n1 + 1) * (n2 + 1))) throw ValidationError("snapshot: wrong sector count");
        std::vector<cplx> weights;
        std::vector<SectorState> sectors;
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto& s = list[k];
            SectorLabel label{s.at("n").get<int>(), s.at("n_prime").get<int>()};
            if (label.n != static_cast<int>(k) / (n2 + 1) || label.n_prime != static_cast<int>(k) % (n2 + 1)) {
                throw ValidationError("snapshot: sectors out of order");
            }
            const auto& amps = s.at("amplitudes");
            if (amps.size() != static_cast<std::size_t>(label.ladder_dim())) throw ValidationError("snapshot: wrong ladder length");
            Eigen::VectorXcd v(label.ladder_dim());
            for (std::size_t q = 0; q < amps.size(); ++q) v(static_cast<Eigen::Index>(q)) = value(amps[q]);
            weights.push_back(value(s.at("weight")));
            sectors.push_back({label, std::move(v)});
        }
        return SystemState(SqueezeParams(j.at("r_1").get<double>(), j.at("phi_1").get<double>()),
                           SqueezeParams(j.at("r_2").get<double>(), j.at("phi_2").get<double>()), n1, n2, std::move(weights),
                           std::move(sectors), j.at("tau").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("snapshot: ") + e.what());
    }
}

}  // namespace trilinear
