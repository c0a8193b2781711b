#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>

#include "splitgates/serialize.hpp"

#ifndef SPLITGATES_VERSION
#define SPLITGATES_VERSION "0.0.0"
#endif

namespace splitgates {

// FNV-1a 64-bit, used only as a content fingerprint for provenance.
inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Provenance record written next to every output set. Timestamps live here,
// never inside the result documents themselves.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string version = SPLITGATES_VERSION;
    std::string started_at;
    std::string finished_at;
    std::string input_digest; // empty when the command reads no input file
};

inline ordered_json to_json(const RunManifest& manifest) {
    ordered_json j;
    j["command"] = manifest.command;
    j["config_digest"] = manifest.config_digest;
    j["seed"] = manifest.seed;
    j["version"] = manifest.version;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["input_digest"] = manifest.input_digest;
    return j;
}

} // namespace splitgates
