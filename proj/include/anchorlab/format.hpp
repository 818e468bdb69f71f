#pragma once

/// @file
/// Text round-tripping for orbit traces: shortest-form double formatting
/// (re-parsing the text recovers the exact binary value) and the
/// `n,dist,envelope,event_flag` CSV dialect, both directions.

#include <anchorlab/iteration.hpp>

#include <array>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace anchorlab {

/// Shortest decimal string that round-trips to exactly this double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

/// One row per recorded step. The envelope column holds value(n)·dist(0) once
/// the envelope is in force (n ≥ its first event) and stays empty before
/// that; event_flag is 1 exactly on event steps.
inline std::string trace_to_csv(const OrbitTrace &trace,
                                const std::optional<EnvelopeSpec> &env = std::nullopt) {
    if (trace.steps.empty())
        throw precondition_error("trace_to_csv: empty trace");
    std::string out = "n,dist,envelope,event_flag\n";
    const double ref = trace.reference_dist();
    for (const auto &s : trace.steps) {
        out += std::to_string(s.n);
        out += ',';
        out += format_double(s.dist);
        out += ',';
        if (env && s.n >= env->start())
            out += format_double(env->value(s.n) * ref);
        out += ',';
        out += s.event ? '1' : '0';
        out += '\n';
    }
    return out;
}

struct ParsedTraceRow {
    long n = 0;
    double dist = 0.0;
    std::optional<double> envelope;
    bool event = false;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <class T> T parse_number(std::string_view sv, long line_no) {
    T value{};
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
        throw precondition_error("trace CSV line " + std::to_string(line_no) +
                                 ": malformed number '" + std::string(sv) + "'");
    return value;
}

} // namespace detail

/// Parses the CSV dialect emitted by trace_to_csv. Strict: exact header, rows
/// of four fields, n increasing by one from 0, event_flag 0/1. Malformed
/// input raises precondition_error naming the line.
inline std::vector<ParsedTraceRow> parse_trace_csv(std::string_view text) {
    std::vector<ParsedTraceRow> rows;
    long line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        ++line_no;
        if (line.empty())
            continue;
        if (line_no == 1) {
            if (line != "n,dist,envelope,event_flag")
                throw precondition_error("trace CSV: unexpected header '" + std::string(line) +
                                         "'");
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != 4)
            throw precondition_error("trace CSV line " + std::to_string(line_no) + ": expected 4 "
                                     "fields, got " + std::to_string(fields.size()));
        ParsedTraceRow row;
        row.n = detail::parse_number<long>(fields[0], line_no);
        row.dist = detail::parse_number<double>(fields[1], line_no);
        if (!fields[2].empty())
            row.envelope = detail::parse_number<double>(fields[2], line_no);
        if (fields[3] == "0")
            row.event = false;
        else if (fields[3] == "1")
            row.event = true;
        else
            throw precondition_error("trace CSV line " + std::to_string(line_no) +
                                     ": event_flag must be 0 or 1");
        const long expected = static_cast<long>(rows.size());
        if (row.n != expected)
            throw precondition_error("trace CSV line " + std::to_string(line_no) +
                                     ": step index " + std::to_string(row.n) + " out of order "
                                     "(expected " + std::to_string(expected) + ")");
        rows.push_back(row);
    }
    if (rows.empty())
        throw precondition_error("trace CSV: no data rows");
    return rows;
}

/// Rebuilds a distance-only trace (empty state vectors) from parsed rows so
/// the envelope checker can run on externally supplied files.
inline OrbitTrace trace_from_rows(const std::vector<ParsedTraceRow> &rows) {
    OrbitTrace trace;
    trace.steps.reserve(rows.size());
    for (const auto &r : rows)
        trace.steps.push_back({r.n, Vec{}, r.dist, r.event});
    return trace;
}

} // namespace anchorlab
