// modes.hpp — the five optical modes and sparse pure states over them
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace trilinear {

using cplx = std::complex<double>;

// Signal/idler of each down-converter plus the second-harmonic mode.
enum class Mode : int { S1 = 0, S2 = 1, I1 = 2, I2 = 3, B = 4 };

inline constexpr int kNumModes = 5;
inline constexpr std::array<Mode, kNumModes> kAllModes = {Mode::S1, Mode::S2, Mode::I1, Mode::I2, Mode::B};

constexpr int index_of(Mode m) { return static_cast<int>(m); }

inline std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::S1: return "s1";
        case Mode::S2: return "s2";
        case Mode::I1: return "i1";
        case Mode::I2: return "i2";
        case Mode::B: return "b";
    }
    return "?";
}

inline Mode parse_mode(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (Mode m : kAllModes) {
        if (lower == mode_name(m)) return m;
    }
    throw UnknownMode("unknown mode '" + std::string(s) + "' (expected s1, s2, i1, i2 or b)");
}

// A set of modes, kept as a bitmask so iteration is always in canonical order.
class ModeSet {
public:
    constexpr ModeSet() = default;
    ModeSet(std::initializer_list<Mode> modes) {
        for (Mode m : modes) insert(m);
    }
    explicit ModeSet(const std::vector<Mode>& modes) {
        for (Mode m : modes) insert(m);
    }

    void insert(Mode m) { bits_ |= bit(m); }
    bool contains(Mode m) const { return (bits_ & bit(m)) != 0; }
    bool empty() const { return bits_ == 0; }
    int size() const { return __builtin_popcount(bits_); }
    bool subset_of(const ModeSet& o) const { return (bits_ & ~o.bits_) == 0; }
    ModeSet complement_in(const ModeSet& universe) const { return ModeSet(universe.bits_ & ~bits_); }
    ModeSet united(const ModeSet& o) const { return ModeSet(bits_ | o.bits_); }

    std::vector<Mode> modes() const {
        std::vector<Mode> out;
        for (Mode m : kAllModes)
            if (contains(m)) out.push_back(m);
        return out;
    }

    static ModeSet all() { return ModeSet(0x1f); }

    // "i1i2" -> {I1, I2}
    static ModeSet parse(std::string_view text) {
        ModeSet set;
        std::size_t pos = 0;
        while (pos < text.size()) {
            if (text[pos] == ' ' || text[pos] == ',') {
                ++pos;
                continue;
            }
            std::size_t len = (pos + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[pos + 1]))) ? 2 : 1;
            set.insert(parse_mode(text.substr(pos, len)));
            pos += len;
        }
        if (set.empty()) throw UnknownMode("empty mode list '" + std::string(text) + "'");
        return set;
    }

    std::string to_string() const {
        std::string s;
        for (Mode m : modes()) s += mode_name(m);
        return s;
    }

    friend bool operator==(const ModeSet&, const ModeSet&) = default;

private:
    explicit constexpr ModeSet(unsigned bits) : bits_(bits) {}
    static constexpr unsigned bit(Mode m) { return 1u << index_of(m); }
    unsigned bits_ = 0;
};

// Occupation numbers indexed by Mode.
using Occupation = std::array<int, kNumModes>;

// Sparse pure state over the five modes; terms sorted by occupation, no duplicates.
class FockState {
public:
    using Term = std::pair<Occupation, cplx>;

    FockState() = default;
    explicit FockState(std::vector<Term> terms) : terms_(std::move(terms)) { canonicalize(); }

    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& [occ, a] : terms_) s += std::norm(a);
        return s;
    }

    cplx amplitude(const Occupation& occ) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), occ,
                                   [](const Term& t, const Occupation& o) { return t.first < o; });
        return (it != terms_.end() && it->first == occ) ? it->second : cplx{};
    }

    int max_occupation(Mode m) const {
        int mx = 0;
        for (const auto& [occ, a] : terms_) mx = std::max(mx, occ[index_of(m)]);
        return mx;
    }

    // <this|other>
    cplx inner(const FockState& other) const {
        cplx s{};
        auto a = terms_.begin();
        auto b = other.terms_.begin();
        while (a != terms_.end() && b != other.terms_.end()) {
            if (a->first < b->first) {
                ++a;
            } else if (b->first < a->first) {
                ++b;
            } else {
                s += std::conj(a->second) * b->second;
                ++a;
                ++b;
            }
        }
        return s;
    }

    FockState scaled(cplx f) const {
        FockState out = *this;
        for (auto& t : out.terms_) t.second *= f;
        return out;
    }

    FockState plus(const FockState& other) const {
        std::vector<Term> all = terms_;
        all.insert(all.end(), other.terms_.begin(), other.terms_.end());
        return FockState(std::move(all));
    }

    // Annihilation / creation on one mode.
    FockState lowered(Mode m) const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        const int k = index_of(m);
        for (auto [occ, a] : terms_) {
            if (occ[k] == 0) continue;
            a *= std::sqrt(static_cast<double>(occ[k]));
            occ[k] -= 1;
            out.emplace_back(occ, a);
        }
        return FockState(std::move(out));
    }

    FockState raised(Mode m) const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        const int k = index_of(m);
        for (auto [occ, a] : terms_) {
            occ[k] += 1;
            a *= std::sqrt(static_cast<double>(occ[k]));
            out.emplace_back(occ, a);
        }
        return FockState(std::move(out));
    }

    template <class Pred>
    FockState filtered(Pred keep) const {
        std::vector<Term> out;
        for (const auto& t : terms_)
            if (keep(t.first)) out.push_back(t);
        FockState s;
        s.terms_ = std::move(out);
        return s;
    }

    double expectation_number(Mode m) const {
        double s = 0.0;
        for (const auto& [occ, a] : terms_) s += occ[index_of(m)] * std::norm(a);
        return s;
    }

private:
    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
        std::vector<Term> merged;
        merged.reserve(terms_.size());
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().first == t.first) {
                merged.back().second += t.second;
            } else {
                merged.push_back(t);
            }
        }
        std::erase_if(merged, [](const Term& t) { return t.second == cplx{}; });
        terms_ = std::move(merged);
    }

    std::vector<Term> terms_;
};

}  // namespace trilinear
