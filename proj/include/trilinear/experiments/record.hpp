// record.hpp — experiment results as named columns, with CSV and JSON forms
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"

namespace trilinear::experiments {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "trilinear-sim 1.0.0";

// One chart: the series are plotted against x_column.
struct Panel {
    std::string title;
    std::string x_column;
    std::vector<std::string> series;
    std::string y_label;

    friend bool operator==(const Panel&, const Panel&) = default;
};

struct Column {
    std::string name;
    std::vector<double> values;

    friend bool operator==(const Column& a, const Column& b) {
        if (a.name != b.name || a.values.size() != b.values.size()) return false;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double x = a.values[i], y = b.values[i];
            if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
        }
        return true;
    }
};

// Formats with 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class ResultRecord {
public:
    std::string config_hash;
    std::string experiment;
    std::vector<Column> columns;
    std::vector<Panel> panels;
    json metadata = json::object();

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

    bool has_column(const std::string& name) const { return find(name) != nullptr; }

    const std::vector<double>& column(const std::string& name) const {
        const Column* c = find(name);
        if (!c) throw ValidationError("ResultRecord: no column '" + name + "'");
        return c->values;
    }

    void add_column(std::string name, std::vector<double> values) {
        if (has_column(name)) throw ValidationError("ResultRecord: duplicate column '" + name + "'");
        if (!columns.empty() && values.size() != rows()) {
            throw ValidationError("ResultRecord: column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                                  std::to_string(rows()));
        }
        columns.push_back({std::move(name), std::move(values)});
    }

    bool converged() const { return metadata.value("converged", true); }

    std::string to_csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + csv_field(columns[c].name);
        out += "\n";
        for (std::size_t r = 0; r < rows(); ++r) {
            for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_double(columns[c].values[r]);
            out += "\n";
        }
        return out;
    }

    json to_json() const {
        json cols = json::array();
        for (const auto& c : columns) {
            json vals = json::array();
            for (double v : c.values) vals.push_back(std::isfinite(v) ? json(v) : json(format_double(v)));
            cols.push_back({{"name", c.name}, {"values", vals}});
        }
        json ps = json::array();
        for (const auto& p : panels) {
            ps.push_back({{"title", p.title}, {"x_column", p.x_column}, {"series", p.series}, {"y_label", p.y_label}});
        }
        return {{"config_hash", config_hash}, {"experiment", experiment}, {"columns", cols}, {"panels", ps}, {"metadata", metadata}};
    }

    static ResultRecord from_json(const json& j) {
        ResultRecord r;
        try {
            r.config_hash = j.at("config_hash").get<std::string>();
            r.experiment = j.at("experiment").get<std::string>();
            for (const auto& c : j.at("columns")) {
                std::vector<double> vals;
                for (const auto& v : c.at("values")) vals.push_back(v.is_string() ? parse_special(v.get<std::string>()) : v.get<double>());
                r.add_column(c.at("name").get<std::string>(), std::move(vals));
            }
            for (const auto& p : j.at("panels")) {
                r.panels.push_back({p.at("title").get<std::string>(), p.at("x_column").get<std::string>(),
                                    p.at("series").get<std::vector<std::string>>(), p.at("y_label").get<std::string>()});
            }
            r.metadata = j.at("metadata");
        } catch (const json::exception& e) {
            throw ValidationError(std::string("ResultRecord: malformed JSON: ") + e.what());
        }
        return r;
    }

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;

private:
    const Column* find(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }

    static std::string csv_field(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }

    static double parse_special(const std::string& s) {
        if (s == "nan") return std::nan("");
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        throw ValidationError("ResultRecord: unexpected value '" + s + "'");
    }
};

}  // namespace trilinear::experiments
