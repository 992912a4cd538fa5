// config.hpp — declarative experiment configurations and their content hash
//
// A config serializes to canonical JSON (sorted keys, shortest round-trip
// floats). The cache key is the SHA-256 of that text with output_dir and
// workers left out, since neither changes the numbers.
#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "../entanglement.hpp"
#include "../errors.hpp"
#include "../fock.hpp"
#include "../swap.hpp"

namespace trilinear::experiments {

using json = nlohmann::json;

enum class Experiment { Fig2, Fig3, Trend, Purity, Swap, Kappa, Beamsplitter, Custom };

inline constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperimentNames = {{
    {Experiment::Fig2, "fig2"},
    {Experiment::Fig3, "fig3"},
    {Experiment::Trend, "trend"},
    {Experiment::Purity, "purity"},
    {Experiment::Swap, "swap"},
    {Experiment::Kappa, "kappa"},
    {Experiment::Beamsplitter, "beamsplitter"},
    {Experiment::Custom, "custom"},
}};

inline std::string to_string(Experiment e) {
    for (const auto& [k, name] : kExperimentNames)
        if (k == e) return std::string(name);
    return "unknown";
}

inline Experiment parse_experiment(std::string_view s) {
    for (const auto& [k, name] : kExperimentNames)
        if (name == s) return k;
    std::string known;
    for (const auto& [k, name] : kExperimentNames) known += (known.empty() ? "" : ", ") + std::string(name);
    throw ValidationError("unknown experiment '" + std::string(s) + "' (expected one of " + known + ")");
}

inline Projector parse_projector(std::string_view s) {
    if (s == "click") return Projector::Click;
    if (s == "1pnr" || s == "one_pnr") return Projector::OnePNR;
    throw ValidationError("unknown projector '" + std::string(s) + "' (expected click or 1pnr)");
}

// Corner values of the crystal parameter box; every combination is evaluated.
struct KappaGrid {
    std::vector<double> d_eff{1e-12, 30e-12};       // m/V
    std::vector<double> length{1e-3, 10e-3};        // m
    std::vector<double> sigma_b{20e-6, 200e-6};     // m
    double lambda_b = 775e-9;                       // m
    double index = 1.8;                             // all three refractive indices
    double delta_kz = 0.0;                          // 1/m
    double pulse_duration = 1e-9;                   // s

    friend bool operator==(const KappaGrid&, const KappaGrid&) = default;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Custom;
    double n_bar_1 = 1.5;
    double n_bar_2 = 1.5;
    double tau_start = 0.0;
    double tau_end = 0.1;
    int tau_steps = 101;
    TruncationSpec truncation = TruncationSpec::automatic(1e-8, 160);
    std::vector<std::string> partitions;   // e.g. "i1i2;b"
    std::vector<std::string> quantities;   // custom only: purity_difference, mandel_q:<mode>, mean:<mode>
    Projector projector = Projector::OnePNR;
    std::vector<double> n_bar_values;      // trend and purity sweeps
    double tau_star = 0.05;                // trend
    double theta_start = 0.0;              // beamsplitter
    double theta_end = std::numbers::pi;
    int theta_steps = 61;
    bool cross_terms = false;              // fig2: add the second-order cross terms column
    KappaGrid kappa;
    std::string output_dir;                // not hashed
    unsigned workers = 1;                  // not hashed

    std::vector<double> tau_grid() const {
        std::vector<double> g(static_cast<std::size_t>(tau_steps));
        for (int k = 0; k < tau_steps; ++k) g[static_cast<std::size_t>(k)] = tau_start + (tau_end - tau_start) * k / (tau_steps - 1);
        g.back() = tau_end;
        return g;
    }

    std::vector<double> theta_grid() const {
        std::vector<double> g(static_cast<std::size_t>(theta_steps));
        for (int k = 0; k < theta_steps; ++k)
            g[static_cast<std::size_t>(k)] = theta_start + (theta_end - theta_start) * k / (theta_steps - 1);
        g.back() = theta_end;
        return g;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
        auto check_nbar = [&](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be a finite number >= 0");
        };
        check_nbar(n_bar_1, "n_bar_1");
        check_nbar(n_bar_2, "n_bar_2");
        for (double v : n_bar_values) check_nbar(v, "n_bar_values entry");
        if (experiment != Experiment::Kappa && experiment != Experiment::Beamsplitter) {
            if (tau_steps < 2) fail("tau_steps must be >= 2");
            if (!(tau_end > tau_start) || !std::isfinite(tau_start) || !std::isfinite(tau_end)) {
                fail("tau grid must be strictly increasing (tau_end > tau_start)");
            }
            if (tau_start < 0.0) fail("tau_start must be >= 0");
        }
        if (experiment == Experiment::Beamsplitter) {
            if (theta_steps < 2) fail("theta_steps must be >= 2");
            if (!(theta_end > theta_start)) fail("theta grid must be strictly increasing");
        }
        if (experiment == Experiment::Trend && !(tau_star >= tau_start && tau_star <= tau_end)) {
            fail("tau_star must lie inside the tau grid");
        }
        if ((experiment == Experiment::Trend || experiment == Experiment::Purity) && n_bar_values.empty()) {
            fail("n_bar_values must not be empty");
        }
        if (!(truncation.tail_epsilon > 0.0 && truncation.tail_epsilon < 1.0)) fail("truncation.tail_epsilon must lie in (0, 1)");
        if (truncation.ceiling < 1) fail("truncation.ceiling must be >= 1");
        if (truncation.n_max && *truncation.n_max < 0) fail("truncation.n_max must be >= 0");
        for (const auto& p : partitions) Bipartition::parse(p);
        for (const auto& q : quantities) {
            if (q == "purity_difference") continue;
            const auto colon = q.find(':');
            const std::string head = q.substr(0, colon);
            if (colon == std::string::npos || (head != "mandel_q" && head != "mean")) {
                fail("unknown quantity '" + q + "' (expected purity_difference, mandel_q:<mode> or mean:<mode>)");
            }
            parse_mode(q.substr(colon + 1));
        }
        if (experiment == Experiment::Custom && partitions.empty() && quantities.empty()) {
            fail("custom experiment needs at least one partition or quantity");
        }
        if (experiment == Experiment::Kappa) {
            if (kappa.d_eff.empty() || kappa.length.empty() || kappa.sigma_b.empty()) fail("kappa grid axes must not be empty");
        }
    }

    // Canonical JSON. Paths and worker counts are omitted when hashing.
    json to_json(bool include_runtime = true) const {
        json j;
        j["experiment"] = to_string(experiment);
        j["n_bar_1"] = n_bar_1;
        j["n_bar_2"] = n_bar_2;
        j["tau_start"] = tau_start;
        j["tau_end"] = tau_end;
        j["tau_steps"] = tau_steps;
        json t;
        t["tail_epsilon"] = truncation.tail_epsilon;
        t["ceiling"] = truncation.ceiling;
        t["n_max"] = truncation.n_max ? json(*truncation.n_max) : json(nullptr);
        j["truncation"] = t;
        j["partitions"] = partitions;
        j["quantities"] = quantities;
        j["projector"] = to_string(projector);
        j["n_bar_values"] = n_bar_values;
        j["tau_star"] = tau_star;
        j["theta_start"] = theta_start;
        j["theta_end"] = theta_end;
        j["theta_steps"] = theta_steps;
        j["cross_terms"] = cross_terms;
        j["kappa"] = json{{"d_eff", kappa.d_eff},
                          {"length", kappa.length},
                          {"sigma_b", kappa.sigma_b},
                          {"lambda_b", kappa.lambda_b},
                          {"index", kappa.index},
                          {"delta_kz", kappa.delta_kz},
                          {"pulse_duration", kappa.pulse_duration}};
        if (include_runtime) {
            j["output_dir"] = output_dir;
            j["workers"] = workers;
        }
        return j;
    }

    // Missing keys keep the experiment's defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const json& j);

    friend bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) { return x.to_json() == y.to_json(); }
};

// Built-in defaults for each experiment.
inline ExperimentConfig defaults(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::Fig2:
            c.n_bar_1 = c.n_bar_2 = 1.5;
            c.tau_start = 0.0, c.tau_end = 0.1, c.tau_steps = 101;
            c.partitions = {"i1i2;b"};
            break;
        case Experiment::Fig3:
            c.n_bar_1 = c.n_bar_2 = 2.5;
            c.tau_start = 0.0, c.tau_end = 0.5, c.tau_steps = 201;
            c.partitions = {"i1i2;b", "s1s2;b", "s1;b", "i1;i2", "s1;i1"};
            break;
        case Experiment::Trend:
            c.tau_start = 0.0, c.tau_end = 0.1, c.tau_steps = 11;
            c.n_bar_values = {0, 1, 2, 3, 4, 5, 6, 7};
            c.tau_star = 0.05;
            c.partitions = {"i1i2;b"};
            break;
        case Experiment::Purity:
            c.tau_start = 0.0, c.tau_end = 0.5, c.tau_steps = 51;
            c.n_bar_values = {0.5, 1.5, 2.5};
            break;
        case Experiment::Swap:
            c.n_bar_1 = c.n_bar_2 = 2.5;
            c.tau_start = 0.0, c.tau_end = 0.1, c.tau_steps = 21;
            c.truncation = TruncationSpec::automatic(1e-8, 80);
            c.projector = Projector::OnePNR;
            break;
        case Experiment::Kappa:
            break;
        case Experiment::Beamsplitter:
            c.n_bar_1 = c.n_bar_2 = 1.5;
            c.theta_start = 0.0, c.theta_end = std::numbers::pi, c.theta_steps = 61;
            break;
        case Experiment::Custom:
            c.partitions = {"i1i2;b"};
            break;
    }
    return c;
}

inline ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    if (!j.contains("experiment")) throw ValidationError("config: missing 'experiment'");
    ExperimentConfig c = defaults(parse_experiment(j.at("experiment").get<std::string>()));
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "experiment") continue;
            else if (key == "n_bar_1") c.n_bar_1 = v.get<double>();
            else if (key == "n_bar_2") c.n_bar_2 = v.get<double>();
            else if (key == "n_bar") c.n_bar_1 = c.n_bar_2 = v.get<double>();
            else if (key == "tau_start") c.tau_start = v.get<double>();
            else if (key == "tau_end") c.tau_end = v.get<double>();
            else if (key == "tau_steps") c.tau_steps = v.get<int>();
            else if (key == "truncation") {
                for (const auto& [tk, tv] : v.items()) {
                    if (tk == "tail_epsilon") c.truncation.tail_epsilon = tv.get<double>();
                    else if (tk == "ceiling") c.truncation.ceiling = tv.get<int>();
                    else if (tk == "n_max") c.truncation.n_max = tv.is_null() ? std::nullopt : std::optional<int>(tv.get<int>());
                    else throw ValidationError("config: unknown truncation key '" + tk + "'");
                }
            }
            else if (key == "partitions") c.partitions = v.get<std::vector<std::string>>();
            else if (key == "quantities") c.quantities = v.get<std::vector<std::string>>();
            else if (key == "projector") c.projector = parse_projector(v.get<std::string>());
            else if (key == "n_bar_values") c.n_bar_values = v.get<std::vector<double>>();
            else if (key == "tau_star") c.tau_star = v.get<double>();
            else if (key == "theta_start") c.theta_start = v.get<double>();
            else if (key == "theta_end") c.theta_end = v.get<double>();
            else if (key == "theta_steps") c.theta_steps = v.get<int>();
            else if (key == "cross_terms") c.cross_terms = v.get<bool>();
            else if (key == "kappa") {
                for (const auto& [kk, kv] : v.items()) {
                    if (kk == "d_eff") c.kappa.d_eff = kv.get<std::vector<double>>();
                    else if (kk == "length") c.kappa.length = kv.get<std::vector<double>>();
                    else if (kk == "sigma_b") c.kappa.sigma_b = kv.get<std::vector<double>>();
                    else if (kk == "lambda_b") c.kappa.lambda_b = kv.get<double>();
                    else if (kk == "index") c.kappa.index = kv.get<double>();
                    else if (kk == "delta_kz") c.kappa.delta_kz = kv.get<double>();
                    else if (kk == "pulse_duration") c.kappa.pulse_duration = kv.get<double>();
                    else throw ValidationError("config: unknown kappa key '" + kk + "'");
                }
            }
            else if (key == "output_dir") c.output_dir = v.get<std::string>();
            else if (key == "workers") c.workers = v.get<unsigned>();
            else throw ValidationError("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

// Value of a flat key=value line, typed by the key.
inline json flat_value(const std::string& key, const std::string& value) {
    static const std::vector<std::string> lists_of_strings = {"partitions", "quantities"};
    static const std::vector<std::string> lists_of_numbers = {"n_bar_values", "kappa.d_eff", "kappa.length", "kappa.sigma_b"};
    static const std::vector<std::string> strings = {"experiment", "projector", "output_dir"};
    auto in = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), key) != v.end(); };
    auto number = [&](const std::string& text) {
        try {
            std::size_t used = 0;
            const double d = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return d;
        } catch (const std::exception&) {
            throw ValidationError("config: '" + key + "' expects a number, got '" + text + "'");
        }
    };
    if (in(strings)) return value;
    if (in(lists_of_strings)) return split_list(value);
    if (in(lists_of_numbers)) {
        json a = json::array();
        for (const auto& item : split_list(value)) a.push_back(number(item));
        return a;
    }
    if (key == "cross_terms") {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw ValidationError("config: 'cross_terms' expects true or false");
    }
    if (key == "truncation.n_max" && (value == "auto" || value == "none")) return nullptr;
    const double d = number(value);
    static const std::vector<std::string> integers = {"tau_steps", "theta_steps", "truncation.ceiling", "truncation.n_max", "workers"};
    if (in(integers)) {
        if (d != std::floor(d)) throw ValidationError("config: '" + key + "' expects an integer");
        return static_cast<long long>(d);
    }
    return d;
}

}  // namespace detail

// Flat "key = value" text; '#' starts a comment, nested keys use dots
// (truncation.tail_epsilon, kappa.d_eff) and lists are comma separated.
inline ExperimentConfig parse_key_value(std::string_view text) {
    json j = json::object();
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq)), value = detail::trim(t.substr(eq + 1));
        const json v = detail::flat_value(key, value);
        const auto dot = key.find('.');
        if (dot == std::string::npos) j[key] = v;
        else j[key.substr(0, dot)][key.substr(dot + 1)] = v;
    }
    return ExperimentConfig::from_json(j);
}

// JSON when the text starts with '{', key=value otherwise.
inline ExperimentConfig parse_config_text(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("config: ") + e.what());
        }
        return ExperimentConfig::from_json(j);
    }
    return parse_key_value(text);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string canonical_json(const ExperimentConfig& c) { return c.to_json(false).dump(); }

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

inline std::string cache_key(const ExperimentConfig& c) { return sha256_hex(canonical_json(c)); }

}  // namespace trilinear::experiments
