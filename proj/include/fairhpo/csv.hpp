#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairhpo/common.hpp"

namespace fairhpo::csv {

// RFC-4180 CSV. Fields containing commas, quotes or newlines are quoted;
// embedded quotes are doubled. Both \n and \r\n line endings are accepted.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    size_t column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError("csv: no column named '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

inline std::vector<std::vector<std::string>> parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    size_t i = 0;
    const size_t n = text.size();
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
        any = false;
    };
    while (i < n) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
            any = true;
            ++i;
        } else if (c == ',') {
            end_field();
            any = true;
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_record();
            i += 2;
        } else if (c == '\n') {
            end_record();
            ++i;
        } else {
            field += c;
            any = true;
            ++i;
        }
    }
    if (quoted) throw ValidationError("csv: unterminated quoted field");
    if (any || !field.empty() || !record.empty()) end_record();
    return records;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("csv: cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto records = parse(ss.str());
    if (records.empty()) throw ValidationError("csv: empty file: " + path);
    Table t;
    t.header = records.front();
    size_t width = t.header.size();
    for (size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width)
            throw ValidationError("csv: row " + std::to_string(r) + " has " +
                                  std::to_string(records[r].size()) + " fields, expected " +
                                  std::to_string(width) + ": " + path);
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

inline std::string escape(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline void write_file(const std::string& path, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TrialError("csv: cannot write file: " + path);
    auto write_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << escape(row[i]);
        }
        out << '\n';
    };
    write_row(t.header);
    for (const auto& r : t.rows) write_row(r);
}

} // namespace fairhpo::csv
