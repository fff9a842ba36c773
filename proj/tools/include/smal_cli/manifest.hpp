#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace smal::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every output set. The manifest goes out
/// first with complete=false and is rewritten once all data files exist, so
/// a crashed run is recognizable.
struct RunManifest {
    std::string command;
    std::string config_path;  // empty for flag-only commands
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string config_hash;  // hash of the consumed config bytes
    bool complete = false;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

}  // namespace smal::cli
