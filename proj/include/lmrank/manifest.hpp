#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace lmrank {

inline constexpr const char* kToolName = "lmrank";
inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the file bytes; enough to pin which inputs a run consumed.
std::uint64_t fnv1a64_file(const std::string& path);

// One manifest per run, next to the outputs: subcommand, resolved config,
// input digests, seed, tool version. Two runs with equal manifests are
// expected to produce byte-identical outputs, so execution-only knobs such
// as the worker count stay out of it.
nlohmann::json make_manifest(const std::string& subcommand, std::uint64_t seed,
                             const std::map<std::string, std::string>& inputs,
                             const nlohmann::json& config);

void write_manifest(const nlohmann::json& manifest, const std::string& path);

}  // namespace lmrank
