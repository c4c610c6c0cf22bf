#pragma once

#include <filesystem>
#include <string>

#include "spce/records.hpp"

namespace spce::io {

inline constexpr std::string_view k_event_log_header =
    "pair_id,station,setting_label,setting_rad,outcome,time_tag";

/// Writes both streams into one CSV, rows sorted by (station, pair_id);
/// doubles carry 17 significant digits so the round trip is exact.
/// Parent directories are created as needed.
void write_event_log(const StreamPair& streams, const std::filesystem::path& path);

/// Reads an event log back into per-station streams. Malformed rows raise
/// DataError naming the offending line.
StreamPair read_event_log(const std::filesystem::path& path);

/// Deterministic shortest-exact formatting used across all CSV output.
std::string format_double(double v);

}  // namespace spce::io
