#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genfl/costmodel.hpp"
#include "genfl/errors.hpp"
#include "genfl/experiment_config.hpp"

namespace genfl {

inline constexpr std::string_view kMetricsCsvHeader =
    "round,mode,test_accuracy,test_loss,mean_client_emd,round_time_sec,"
    "round_energy_joules,pool_size";

namespace detail {

inline std::string csv_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double csv_parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("metrics csv line " + std::to_string(line_no) +
                                 ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t csv_parse_u64(std::string_view s, std::size_t line_no) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("metrics csv line " + std::to_string(line_no) +
                                 ": bad integer '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace detail

inline std::string metrics_row_to_csv(const RoundMetrics& m) {
    std::string out;
    out += std::to_string(m.round);
    out += ',';
    out += m.mode;
    out += ',';
    out += detail::csv_double(m.test_accuracy);
    out += ',';
    out += detail::csv_double(m.test_loss);
    out += ',';
    out += detail::csv_double(m.mean_client_emd);
    out += ',';
    out += detail::csv_double(m.round_time_sec);
    out += ',';
    out += detail::csv_double(m.round_energy_joules);
    out += ',';
    out += std::to_string(m.pool_size);
    return out;
}

inline std::string metrics_to_csv(const std::vector<RoundMetrics>& rows) {
    std::string out(kMetricsCsvHeader);
    out += '\n';
    for (const auto& m : rows) {
        out += metrics_row_to_csv(m);
        out += '\n';
    }
    return out;
}

inline std::vector<RoundMetrics> metrics_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<RoundMetrics> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kMetricsCsvHeader)
                throw std::runtime_error("metrics csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto f = detail::split_csv_line(line);
        if (f.size() != 8)
            throw std::runtime_error("metrics csv line " + std::to_string(line_no) +
                                     ": expected 8 fields, got " + std::to_string(f.size()));
        RoundMetrics m;
        m.round = static_cast<std::size_t>(detail::csv_parse_u64(f[0], line_no));
        if (!parse_mode(std::string(f[1])))
            throw std::runtime_error("metrics csv line " + std::to_string(line_no) +
                                     ": bad mode '" + std::string(f[1]) + "'");
        m.mode = std::string(f[1]);
        m.test_accuracy = detail::csv_parse_double(f[2], line_no);
        m.test_loss = detail::csv_parse_double(f[3], line_no);
        m.mean_client_emd = detail::csv_parse_double(f[4], line_no);
        m.round_time_sec = detail::csv_parse_double(f[5], line_no);
        m.round_energy_joules = detail::csv_parse_double(f[6], line_no);
        m.pool_size = static_cast<std::size_t>(detail::csv_parse_u64(f[7], line_no));
        rows.push_back(m);
    }
    if (!header_seen) throw std::runtime_error("metrics csv: missing header");
    return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write via a sibling temp file + rename so readers never see a torn file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace genfl
