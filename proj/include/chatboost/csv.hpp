#pragma once

#include <string>
#include <vector>

namespace chatboost {

/// A parsed CSV file: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    size_t column_index(const std::string& name) const;  // throws SchemaError
    bool has_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);

/// Serializes and writes atomically.
void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace chatboost
