#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chatboost {

/// Level used for empty categorical cells so encoders stay total.
inline constexpr const char* kMissingLevel = "__missing__";

enum class ColumnKind { Numeric, Categorical };

/// Ordered set of distinct level strings with a code for each; codes are
/// assigned in first-appearance order.
class LevelDictionary {
public:
    /// Returns the code for `level`, adding it if absent.
    int32_t intern(const std::string& level);
    /// Code for `level`, or -1 when not present.
    int32_t find(const std::string& level) const;
    const std::string& level(int32_t code) const;
    int32_t size() const { return static_cast<int32_t>(levels_.size()); }
    const std::vector<std::string>& levels() const { return levels_; }

private:
    std::vector<std::string> levels_;
    std::unordered_map<std::string, int32_t> index_;
};

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<double> values;   // Numeric
    std::vector<int32_t> codes;   // Categorical, indices into dict
    LevelDictionary dict;

    size_t size() const { return kind == ColumnKind::Numeric ? values.size() : codes.size(); }
    const std::string& level_at(size_t row) const { return dict.level(codes[row]); }
};

/// Columnar table of numeric and categorical columns plus a 0/1 target.
/// Immutable once populated; safe to share across threads.
class DesignMatrix {
public:
    void add_numeric_column(std::string name, std::vector<double> values);
    void add_categorical_column(std::string name, const std::vector<std::string>& values);
    void add_column(Column col);
    void set_target(std::vector<int> target);
    void set_target_name(std::string name) { target_name_ = std::move(name); }

    size_t row_count() const { return rows_; }
    size_t column_count() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    bool has_column(const std::string& name) const;
    const Column& column(const std::string& name) const;  // throws ColumnError
    const std::vector<int>& target() const { return target_; }
    const std::string& target_name() const { return target_name_; }

    /// Mean of the target vector.
    double global_mean() const;  // throws EmptyDataError when there are no rows
    /// Occurrence count per dictionary level of a categorical column; levels
    /// absent from the data report 0.
    std::map<std::string, int64_t> level_counts(const std::string& name) const;

private:
    void check_rows(size_t n, const std::string& what);

    std::vector<Column> columns_;
    std::vector<int> target_;
    std::string target_name_ = "y";
    size_t rows_ = 0;
    bool rows_fixed_ = false;
};

using Schema = std::vector<std::pair<std::string, ColumnKind>>;

/// Reads a CSV file with a header row into a DesignMatrix. Only columns
/// named in `schema` become features (in header order); `target_name` must
/// hold 0/1 tokens. Empty categorical cells map to kMissingLevel.
DesignMatrix ingest_csv(const std::string& path, const Schema& schema,
                        const std::string& target_name);

DesignMatrix ingest_csv_text(const std::string& text, const Schema& schema,
                             const std::string& target_name);

/// Writes columns plus the target back out; numeric cells use shortest
/// round-trip formatting so re-ingestion reproduces exact values.
void write_matrix_csv(const DesignMatrix& dm, const std::string& path);

std::string matrix_to_csv(const DesignMatrix& dm);

}  // namespace chatboost
