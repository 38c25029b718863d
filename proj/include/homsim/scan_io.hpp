#pragma once

// File formats of the command-line front end.
//
//   scan CSV:    header "tau_ps,coincidences,trials", one sample per line
//   counts file: single line "n0,n1,n2"
//
// Lines starting with '#' are comments and are ignored. Parse errors name
// the offending line.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/estimation.hpp"

namespace homsim {

namespace detail {

inline std::string trim(std::string_view v) {
    const auto first = v.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return "";
    const auto last = v.find_last_not_of(" \t\r\n");
    return std::string(v.substr(first, last - first + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    return out;
}

template <typename T>
inline T parse_number(const std::string& text, const std::string& where) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw std::runtime_error(where + ": cannot parse '" + text + "'");
    return value;
}

}  // namespace detail

/// Reads a delay scan from CSV. Throws std::runtime_error with
/// "<path>:<line>: ..." diagnostics.
inline FringeScan read_scan_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");

    FringeScan scan;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto fields = detail::split_fields(t);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "tau_ps" || fields[1] != "coincidences" ||
                fields[2] != "trials")
                throw std::runtime_error(where + ": expected header 'tau_ps,coincidences,trials'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) throw std::runtime_error(where + ": expected 3 fields");
        FringeSample smp;
        smp.tau = detail::parse_number<double>(fields[0], where);
        smp.coincidences = detail::parse_number<std::uint64_t>(fields[1], where);
        smp.trials = detail::parse_number<std::uint64_t>(fields[2], where);
        if (smp.coincidences > smp.trials)
            throw std::runtime_error(where + ": coincidences exceed trials");
        if (!scan.samples.empty() && !(smp.tau > scan.samples.back().tau))
            throw std::runtime_error(where + ": taus must be strictly increasing");
        scan.samples.push_back(smp);
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header line");
    if (scan.samples.empty()) throw std::runtime_error(path + ": no samples");
    return scan;
}

/// Writes a delay scan in the CSV format read_scan_csv() accepts.
inline void write_scan_csv(const std::string& path, const FringeScan& scan) {
    scan.validate();
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path + ": cannot open for writing");
    os << "tau_ps,coincidences,trials\n";
    for (const auto& smp : scan.samples) {
        char buf[40];
        const auto res = std::to_chars(buf, buf + sizeof(buf), smp.tau);
        os.write(buf, res.ptr - buf);
        os << "," << smp.coincidences << "," << smp.trials << "\n";
    }
}

/// Reads a single-line "n0,n1,n2" counts file.
inline CountRecord read_counts_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto fields = detail::split_fields(t);
        if (fields.size() != 3) throw std::runtime_error(where + ": expected 'n0,n1,n2'");
        CountRecord c;
        c.n0 = detail::parse_number<std::uint64_t>(fields[0], where);
        c.n1 = detail::parse_number<std::uint64_t>(fields[1], where);
        c.n2 = detail::parse_number<std::uint64_t>(fields[2], where);
        c.validate();
        return c;
    }
    throw std::runtime_error(path + ": no counts line found");
}

}  // namespace homsim
