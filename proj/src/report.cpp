#include "spce/report.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "spce/errors.hpp"
#include "spce/version.hpp"

namespace spce::io {

std::string config_hash(const Json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream oss;
    oss << std::hex << std::setfill('0') << std::setw(16) << h;
    return oss.str();
}

Json make_report(const Json& config_echo) {
    Json report;
    report["schema"] = k_report_schema;
    report["version"] = std::string(k_version);
    report["config"] = config_echo;
    report["config_hash"] = config_hash(config_echo);
    return report;
}

void emit_report(const Json& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("emit_report: cannot open '" + path.string() + "'");
    out << report.dump(2) << '\n';
    if (!out) throw DataError("emit_report: write failed for '" + path.string() + "'");
}

}  // namespace spce::io
