#include "chatboost/csv.hpp"

#include <sstream>

#include "chatboost/error.hpp"
#include "chatboost/io.hpp"

namespace chatboost {

size_t CsvTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaError("column '" + name + "' not present in header");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& h : header) {
        if (h == name) return true;
    }
    return false;
}

namespace {

// One record per call; handles quoted fields with "" escapes and \r\n.
std::vector<std::string> parse_record(const std::string& text, size_t& pos, size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                } else {
                    in_quotes = false;
                    ++pos;
                }
            } else {
                field.push_back(c);
                ++pos;
            }
        } else if (c == '"') {
            if (!field.empty()) {
                throw ParseError("line " + std::to_string(line_no) + ": stray quote inside field");
            }
            in_quotes = true;
            ++pos;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++pos;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
            ++pos;
        }
    }
    if (in_quotes) {
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    if (text.empty()) throw ParseError("empty CSV input");
    size_t pos = 0;
    size_t line_no = 1;
    table.header = parse_record(text, pos, line_no);
    while (pos < text.size()) {
        ++line_no;
        // Skip a trailing blank line.
        if (text[pos] == '\n' || (text[pos] == '\r' && pos + 1 >= text.size())) break;
        auto row = parse_record(text, pos, line_no);
        if (row.size() != table.header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(row.size()));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    return parse_csv(read_file(path));
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw ShapeError("CSV row width " + std::to_string(row.size()) +
                             " does not match header width " + std::to_string(header.size()));
        }
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace chatboost
