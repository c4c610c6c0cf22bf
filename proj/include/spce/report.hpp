#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace spce::io {

/// Insertion-ordered JSON keeps report key order deterministic, so equal
/// inputs produce byte-identical files.
using Json = nlohmann::ordered_json;

/// Report skeleton: schema tag, version, echoed config and its hash.
Json make_report(const Json& config_echo);

/// FNV-1a 64-bit hash of the canonical config dump, as fixed-width hex.
std::string config_hash(const Json& config);

/// Serializes with 2-space indent and trailing newline; creates missing
/// directories. Throws DataError on IO failure.
void emit_report(const Json& report, const std::filesystem::path& path);

}  // namespace spce::io
