#include "lmrank/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lmrank {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(path + ": cannot open file for digest");
    }
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

nlohmann::json make_manifest(const std::string& subcommand, std::uint64_t seed,
                             const std::map<std::string, std::string>& inputs,
                             const nlohmann::json& config) {
    nlohmann::json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["subcommand"] = subcommand;
    manifest["seed"] = seed;
    manifest["config"] = config;
    nlohmann::json input_digests = nlohmann::json::object();
    for (const auto& [name, path] : inputs) {
        std::ostringstream hex;
        hex << std::hex << std::setfill('0') << std::setw(16) << fnv1a64_file(path);
        input_digests[name] = {{"path", path}, {"fnv1a64", hex.str()}};
    }
    manifest["inputs"] = input_digests;
    return manifest;
}

void write_manifest(const nlohmann::json& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

}  // namespace lmrank
