#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace alnf {

inline constexpr const char* kToolVersion = "alnf 0.1.0";

/// Flat key=value configuration with namespaced keys ("ppo.kl_coef").
/// Lines: `key = value`, '#' starts a comment, blank lines ignored.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig from_file(const std::filesystem::path& path);
    static KvConfig from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::string require_string(const std::string& key) const;

    /// FNV-1a over the sorted "key=value" entries. Stable across runs and
    /// insertion order; recorded in every output artifact.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    nlohmann::json to_json() const;

private:
    std::map<std::string, std::string> entries_;
};

/// Standard metadata block embedded in output artifacts.
nlohmann::json artifact_meta(const KvConfig& cfg, std::uint64_t seed);

}  // namespace alnf
