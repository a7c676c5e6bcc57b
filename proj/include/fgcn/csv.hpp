#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "fgcn/errors.hpp"

namespace fgcn {

// Shortest round-trip decimal form (std::to_chars), so CSV output is
// byte-stable and parses back to the identical double.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
    double out = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end)
        throw parse_error("not a number: '" + text + "'");
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // all sized like header
    std::map<std::string, std::size_t> column;

    std::size_t column_index(const std::string& name) const {
        auto it = column.find(name);
        if (it == column.end()) throw config_error("missing column '" + name + "'");
        return it->second;
    }

    bool has_column(const std::string& name) const { return column.count(name) > 0; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace detail

// Plain comma-separated values; no quoting (none of the schemas here need
// it). Lines starting with '#' are metadata comments and are skipped.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        if (table.header.empty()) {
            table.header = detail::split_csv_line(stripped);
            for (std::size_t i = 0; i < table.header.size(); ++i) table.column[table.header[i]] = i;
            continue;
        }
        auto fields = detail::split_csv_line(stripped);
        if (fields.size() != table.header.size())
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw parse_error(path + ": no header row");
    return table;
}

class CsvWriter {
  public:
    void comment(const std::string& text) { out_ += "# " + text + "\n"; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ += ',';
            out_ += fields[i];
        }
        out_ += '\n';
    }

    const std::string& str() const { return out_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot write '" + path + "'");
        out << out_;
        if (!out) throw io_error("write failed for '" + path + "'");
    }

  private:
    std::string out_;
};

}  // namespace fgcn
