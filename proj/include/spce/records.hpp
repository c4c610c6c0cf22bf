#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spce/angles.hpp"

namespace spce {

enum class Station : char { A = 'A', B = 'B' };

/// A measurement setting: a short label (used to key response tables and
/// reports) plus the direction it stands for.
struct Setting {
    std::string label;
    AnalyzerSetting angle;
};

/// One detection event at one station.
struct StationRecord {
    std::int64_t pair_id = 0;
    Station station = Station::A;
    std::string setting_label;
    double setting_rad = 0.0;
    int outcome = 0;       // +1 or -1
    double time_tag = 0.0; // seconds, >= 0
};

using Stream = std::vector<StationRecord>;

/// The two per-station outcome streams of one experimental pass.
struct StreamPair {
    Stream a;
    Stream b;
};

/// Anything that can run one pass of a two-station pair experiment.
/// Implementations must be pure: identical (settings, n_pairs, seed)
/// inputs produce bit-identical streams.
class PairSource {
public:
    virtual ~PairSource() = default;
    virtual StreamPair generate(const Setting& setting_a, const Setting& setting_b,
                                std::int64_t n_pairs, std::uint64_t seed) const = 0;
};

}  // namespace spce
