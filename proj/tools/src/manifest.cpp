#include "smal_cli/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace smal::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& out_dir) {
    nlohmann::json doc;
    doc["command"] = m.command;
    doc["config_path"] = m.config_path;
    doc["seed"] = m.seed;
    doc["out_dir"] = m.out_dir;
    doc["tool_version"] = kToolVersion;
    doc["config_hash"] = m.config_hash;
    doc["complete"] = m.complete;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
    out << doc.dump(2) << "\n";
}

}  // namespace smal::cli
