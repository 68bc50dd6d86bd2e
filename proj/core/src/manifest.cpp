#include "chexlab/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "chexlab/digest.hpp"
#include "chexlab/error.hpp"

namespace chexlab {

std::string now_iso8601_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

FileDigest digest_of(const std::string& name, const std::filesystem::path& path) {
    return FileDigest{name, path.string(), sha256_file(path)};
}

nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["subcommand"] = m.subcommand;
    j["tool_version"] = m.tool_version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["seed"] = m.seed;
    j["config"] = m.config;
    auto files = [](const std::vector<FileDigest>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const FileDigest& f : v) {
            nlohmann::ordered_json e;
            e["name"] = f.name;
            e["path"] = f.path;
            e["sha256"] = f.sha256;
            arr.push_back(std::move(e));
        }
        return arr;
    };
    j["inputs"] = files(m.inputs);
    j["outputs"] = files(m.outputs);
    j["warning_count"] = m.warning_count;
    j["error_count"] = m.error_count;
    j["details"] = m.details;
    return j;
}

void append_run_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    std::ofstream out(run_dir / "run_manifest.jsonl", std::ios::app);
    if (!out) raise(ErrorKind::Io, "cannot append to " + (run_dir / "run_manifest.jsonl").string());
    out << manifest_to_json(manifest).dump() << '\n';
}

}  // namespace chexlab
