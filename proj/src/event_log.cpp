#include "spce/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "spce/errors.hpp"

namespace spce::io {

std::string format_double(double v) {
    std::ostringstream oss;
    oss.precision(17);
    oss << v;
    return oss.str();
}

namespace {

void write_stream_rows(std::ofstream& out, const Stream& stream) {
    std::vector<const StationRecord*> rows;
    rows.reserve(stream.size());
    for (const auto& r : stream) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const StationRecord* a, const StationRecord* b) {
        return a->pair_id < b->pair_id;
    });
    for (const StationRecord* r : rows) {
        if (r->setting_label.find(',') != std::string::npos ||
            r->setting_label.find('\n') != std::string::npos)
            throw DataError("write_event_log: setting_label must not contain ',' or newline");
        out << r->pair_id << ',' << static_cast<char>(r->station) << ',' << r->setting_label
            << ',' << format_double(r->setting_rad) << ',' << r->outcome << ','
            << format_double(r->time_tag) << '\n';
    }
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

[[noreturn]] void bad_row(const std::filesystem::path& path, std::size_t line_no,
                          const std::string& why) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line_no, const char* what) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        bad_row(path, line_no, std::string("invalid ") + what + " '" + field + "'");
    return v;
}

}  // namespace

void write_event_log(const StreamPair& streams, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_event_log: cannot open '" + path.string() + "'");
    out << k_event_log_header << '\n';
    write_stream_rows(out, streams.a);
    write_stream_rows(out, streams.b);
    if (!out) throw DataError("write_event_log: write failed for '" + path.string() + "'");
}

StreamPair read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_event_log: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ":1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != k_event_log_header)
        throw DataError(path.string() + ":1: unexpected header '" + line + "'");

    StreamPair streams;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 6) bad_row(path, line_no, "expected 6 fields");

        StationRecord r;
        {
            const auto& f = fields[0];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), r.pair_id);
            if (ec != std::errc() || ptr != f.data() + f.size() || r.pair_id < 0)
                bad_row(path, line_no, "invalid pair_id '" + f + "'");
        }
        if (fields[1] == "A")
            r.station = Station::A;
        else if (fields[1] == "B")
            r.station = Station::B;
        else
            bad_row(path, line_no, "invalid station '" + fields[1] + "'");
        r.setting_label = fields[2];
        r.setting_rad = parse_double(fields[3], path, line_no, "setting_rad");
        if (!std::isfinite(r.setting_rad))
            bad_row(path, line_no, "setting_rad must be finite");
        if (fields[4] == "1")
            r.outcome = +1;
        else if (fields[4] == "-1")
            r.outcome = -1;
        else
            bad_row(path, line_no, "invalid outcome '" + fields[4] + "' (must be 1 or -1)");
        r.time_tag = parse_double(fields[5], path, line_no, "time_tag");
        if (!std::isfinite(r.time_tag) || r.time_tag < 0.0)
            bad_row(path, line_no, "time_tag must be finite and >= 0");

        (r.station == Station::A ? streams.a : streams.b).push_back(std::move(r));
    }
    return streams;
}

}  // namespace spce::io
