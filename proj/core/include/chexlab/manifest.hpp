#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chexlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct FileDigest {
    std::string name;
    std::string path;
    std::string sha256;
};

// One record per run, appended to <run_dir>/run_manifest.jsonl. Every
// subcommand that writes an output writes one of these.
struct RunManifest {
    std::string subcommand;
    std::string tool_version{kToolVersion};
    std::string started_at;
    std::string finished_at;
    std::uint64_t seed = 0;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    std::size_t warning_count = 0;
    std::size_t error_count = 0;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

std::string now_iso8601_utc();
FileDigest digest_of(const std::string& name, const std::filesystem::path& path);
nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);
void append_run_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

}  // namespace chexlab
