// cache.hpp — content-addressed result cache on the local filesystem
//
// Records are stored as <dir>/<key>.json. A commit writes a uniquely named
// temporary file and renames it over the target, so readers never see a
// partial record; concurrent writers of one key race harmlessly because
// they write identical content.
#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include "record.hpp"

namespace trilinear::experiments {

inline constexpr const char* kCacheEnvVar = "TRILINEAR_SIM_CACHE";

class ResultCache {
public:
    ResultCache() = default;  // disabled
    explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    // An explicit directory wins over the environment; neither means disabled.
    static ResultCache from_env(const std::optional<std::string>& override_dir = std::nullopt) {
        if (override_dir && !override_dir->empty()) return ResultCache(*override_dir);
        if (const char* env = std::getenv(kCacheEnvVar); env && *env) return ResultCache(env);
        return ResultCache();
    }

    bool enabled() const { return dir_.has_value(); }
    const std::optional<std::filesystem::path>& directory() const { return dir_; }

    std::filesystem::path path_for(const std::string& key) const {
        if (!dir_) throw ValidationError("ResultCache: cache is disabled");
        return *dir_ / (key + ".json");
    }

    // A missing or unreadable entry is a miss.
    std::optional<ResultRecord> load(const std::string& key) const {
        if (!dir_) return std::nullopt;
        std::ifstream f(path_for(key));
        if (!f) return std::nullopt;
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            ResultRecord r = ResultRecord::from_json(json::parse(ss.str()));
            if (r.config_hash != key) return std::nullopt;
            return r;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    void store(const ResultRecord& rec) const {
        if (!dir_) return;
        std::filesystem::create_directories(*dir_);
        static std::atomic<unsigned long> counter{0};
        const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
        const std::filesystem::path tmp = *dir_ / ("." + rec.config_hash + "." + std::to_string(::getpid()) + "." +
                                                   std::to_string(tid) + "." + std::to_string(counter++) + ".tmp");
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw Error("ResultCache: cannot write '" + tmp.string() + "'");
            f << rec.to_json().dump(1) << "\n";
            f.flush();
            if (!f) throw Error("ResultCache: write failed for '" + tmp.string() + "'");
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path_for(rec.config_hash), ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw Error("ResultCache: cannot commit '" + rec.config_hash + "'");
        }
    }

private:
    std::optional<std::filesystem::path> dir_;
};

}  // namespace trilinear::experiments
