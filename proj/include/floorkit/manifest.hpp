#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace floorkit {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit content digest; change detection, not cryptography.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

// Write-to-temp-then-rename so readers never see partial files.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Record of one CLI run: what was read, with which settings, what was written.
struct RunManifest {
    std::string command;
    std::string version = kToolVersion;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::uint64_t>> inputs;   // path -> digest
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // path -> digest

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
};

// JSON, written atomically.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

} // namespace floorkit
