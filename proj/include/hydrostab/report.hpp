#pragma once

/// Structured result persistence: canonical JSON reports (stable field order,
/// byte-identical re-emission) and run manifests with content hashes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hydrostab/grid.hpp"

namespace hydrostab {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "hydrostab 0.1.0";

/// Serializes with 2-space indentation and a trailing newline.
void emit_report(const std::filesystem::path& path, const json& doc);

json load_report(const std::filesystem::path& path);

/// FNV-1a hash of a field's checkpoint bytes, hex-encoded.
std::string field_hash(const ScalarField& f);

/// FNV-1a hash over a file's bytes, hex-encoded.
std::string file_hash(const std::filesystem::path& path);

std::string timestamp_utc();

}  // namespace hydrostab
