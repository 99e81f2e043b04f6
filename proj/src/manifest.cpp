#include "floorkit/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace floorkit {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return fnv1a64(buffer.str());
}

std::string digest_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[digest & 0xf];
        digest >>= 4;
    }
    return out;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs.emplace_back(path.string(), fnv1a64_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs.emplace_back(path.string(), fnv1a64_file(path));
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["command"] = manifest.command;
    doc["version"] = manifest.version;

    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : manifest.config) config[key] = value;
    doc["config"] = std::move(config);

    const auto file_list = [](const std::vector<std::pair<std::string, std::uint64_t>>& files) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [file, digest] : files) {
            arr.push_back({{"path", file}, {"fnv1a64", digest_hex(digest)}});
        }
        return arr;
    };
    doc["inputs"] = file_list(manifest.inputs);
    doc["outputs"] = file_list(manifest.outputs);

    atomic_write(path, doc.dump(2) + "\n");
}

} // namespace floorkit
