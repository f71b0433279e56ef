#include "chatboost/design_matrix.hpp"

#include <cmath>
#include <sstream>

#include "chatboost/csv.hpp"
#include "chatboost/error.hpp"
#include "chatboost/io.hpp"

namespace chatboost {

int32_t LevelDictionary::intern(const std::string& level) {
    auto it = index_.find(level);
    if (it != index_.end()) return it->second;
    int32_t code = static_cast<int32_t>(levels_.size());
    levels_.push_back(level);
    index_.emplace(level, code);
    return code;
}

int32_t LevelDictionary::find(const std::string& level) const {
    auto it = index_.find(level);
    return it == index_.end() ? -1 : it->second;
}

const std::string& LevelDictionary::level(int32_t code) const {
    if (code < 0 || code >= size()) {
        throw ColumnError("level code " + std::to_string(code) + " out of range");
    }
    return levels_[static_cast<size_t>(code)];
}

void DesignMatrix::check_rows(size_t n, const std::string& what) {
    if (!rows_fixed_) {
        rows_ = n;
        rows_fixed_ = true;
        return;
    }
    if (n != rows_) {
        throw ShapeError(what + " has " + std::to_string(n) + " entries, expected " +
                         std::to_string(rows_));
    }
}

void DesignMatrix::add_numeric_column(std::string name, std::vector<double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ParamError("non-finite value in numeric column '" + name + "'");
        }
    }
    Column col;
    col.name = std::move(name);
    col.kind = ColumnKind::Numeric;
    col.values = std::move(values);
    add_column(std::move(col));
}

void DesignMatrix::add_categorical_column(std::string name,
                                          const std::vector<std::string>& values) {
    Column col;
    col.name = std::move(name);
    col.kind = ColumnKind::Categorical;
    col.codes.reserve(values.size());
    for (const auto& v : values) {
        col.codes.push_back(col.dict.intern(v.empty() ? kMissingLevel : v));
    }
    add_column(std::move(col));
}

void DesignMatrix::add_column(Column col) {
    if (has_column(col.name)) {
        throw SchemaError("duplicate column name '" + col.name + "'");
    }
    if (col.kind == ColumnKind::Categorical) {
        for (int32_t code : col.codes) {
            if (code < 0 || code >= col.dict.size()) {
                throw ColumnError("column '" + col.name + "' holds a level code outside its dictionary");
            }
        }
    }
    check_rows(col.size(), "column '" + col.name + "'");
    columns_.push_back(std::move(col));
}

void DesignMatrix::set_target(std::vector<int> target) {
    for (size_t i = 0; i < target.size(); ++i) {
        if (target[i] != 0 && target[i] != 1) {
            throw ParseError("target entry at row " + std::to_string(i + 1) +
                             " is not 0 or 1");
        }
    }
    check_rows(target.size(), "target");
    target_ = std::move(target);
}

bool DesignMatrix::has_column(const std::string& name) const {
    for (const auto& c : columns_) {
        if (c.name == name) return true;
    }
    return false;
}

const Column& DesignMatrix::column(const std::string& name) const {
    for (const auto& c : columns_) {
        if (c.name == name) return c;
    }
    throw ColumnError("unknown column '" + name + "'");
}

double DesignMatrix::global_mean() const {
    if (target_.empty()) throw EmptyDataError("global mean of an empty target");
    double sum = 0.0;
    for (int y : target_) sum += y;
    return sum / static_cast<double>(target_.size());
}

std::map<std::string, int64_t> DesignMatrix::level_counts(const std::string& name) const {
    const Column& col = column(name);
    if (col.kind != ColumnKind::Categorical) {
        throw ColumnError("column '" + name + "' is not categorical");
    }
    std::map<std::string, int64_t> counts;
    for (const auto& level : col.dict.levels()) counts[level] = 0;
    for (int32_t code : col.codes) ++counts[col.dict.level(code)];
    return counts;
}

namespace {

int parse_target_token(const std::string& token, size_t row_no) {
    if (token == "0") return 0;
    if (token == "1") return 1;
    throw ParseError("target at data row " + std::to_string(row_no) +
                     " must be 0 or 1, got '" + token + "'");
}

}  // namespace

DesignMatrix ingest_csv_text(const std::string& text, const Schema& schema,
                             const std::string& target_name) {
    CsvTable table = parse_csv(text);

    std::map<std::string, ColumnKind> kinds;
    for (const auto& [name, kind] : schema) {
        if (!kinds.emplace(name, kind).second) {
            throw SchemaError("schema lists column '" + name + "' twice");
        }
        table.column_index(name);  // throws if absent
    }
    size_t target_idx = table.column_index(target_name);

    DesignMatrix dm;
    dm.set_target_name(target_name);
    // Feature columns follow header order so ingestion is order-stable.
    for (size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        auto it = kinds.find(name);
        if (it == kinds.end()) continue;
        if (it->second == ColumnKind::Numeric) {
            std::vector<double> values;
            values.reserve(table.rows.size());
            for (size_t r = 0; r < table.rows.size(); ++r) {
                values.push_back(parse_double(
                    table.rows[r][c], "column '" + name + "' at data row " + std::to_string(r + 1)));
            }
            dm.add_numeric_column(name, std::move(values));
        } else {
            std::vector<std::string> values;
            values.reserve(table.rows.size());
            for (const auto& row : table.rows) values.push_back(row[c]);
            dm.add_categorical_column(name, values);
        }
    }
    std::vector<int> target;
    target.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        target.push_back(parse_target_token(table.rows[r][target_idx], r + 1));
    }
    dm.set_target(std::move(target));
    return dm;
}

DesignMatrix ingest_csv(const std::string& path, const Schema& schema,
                        const std::string& target_name) {
    return ingest_csv_text(read_file(path), schema, target_name);
}

std::string matrix_to_csv(const DesignMatrix& dm) {
    std::ostringstream out;
    for (const auto& col : dm.columns()) out << csv_escape(col.name) << ',';
    out << csv_escape(dm.target_name()) << '\n';
    for (size_t r = 0; r < dm.row_count(); ++r) {
        for (const auto& col : dm.columns()) {
            if (col.kind == ColumnKind::Numeric) {
                out << format_double(col.values[r]);
            } else {
                out << csv_escape(col.level_at(r));
            }
            out << ',';
        }
        out << dm.target()[r] << '\n';
    }
    return out.str();
}

void write_matrix_csv(const DesignMatrix& dm, const std::string& path) {
    atomic_write_file(path, matrix_to_csv(dm));
}

}  // namespace chatboost
