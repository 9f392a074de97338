#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace biasaudit {

enum class ColumnKind { categorical, numeric, binary };
enum class ColumnRole { feature, label, protected_attr, group_key, drop };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(ColumnRole role);
std::optional<ColumnKind> parse_column_kind(std::string_view s);
std::optional<ColumnRole> parse_column_role(std::string_view s);

// Categorical cells matching a missing token are interned under this
// sentinel; it behaves as an ordinary category downstream (usable as a split
// value) but never as a facet member.
inline constexpr std::string_view kMissingCategory = "«missing»";

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  ColumnRole role = ColumnRole::feature;
  std::vector<std::string> missing_tokens;
  int index = -1;  // file position, used when the CSV has no header row
};

// Reversible string interning for categorical columns. Codes are assigned in
// first-appearance order, which is deterministic for a fixed input file.
class Dictionary {
 public:
  std::int32_t intern(std::string_view value);
  std::optional<std::int32_t> find(std::string_view value) const;
  const std::string& decode(std::int32_t code) const;
  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& values() const { return values_; }
  bool operator==(const Dictionary& other) const { return values_ == other.values_; }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, std::int32_t> codes_;
};

struct Column {
  ColumnSchema schema;
  std::vector<std::int32_t> codes;  // categorical / binary cells
  std::vector<double> values;       // numeric cells; NaN marks missing
  Dictionary dict;                  // categorical / binary only

  bool is_numeric() const { return schema.kind == ColumnKind::numeric; }
  std::size_t size() const { return is_numeric() ? values.size() : codes.size(); }
  bool is_missing(std::size_t row) const;
  std::optional<std::int32_t> missing_code() const { return dict.find(kMissingCategory); }
};

// Columnar, immutable-after-construction table. All mutation happens during
// ingestion or via whole-table transforms that return a new table.
class DataTable {
 public:
  DataTable() = default;

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return cols_.size(); }
  const std::vector<Column>& columns() const { return cols_; }
  const Column& column(std::size_t i) const { return cols_.at(i); }
  const Column* find_column(std::string_view name) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  void add_column(Column col);  // throws DataError on row-count mismatch
  DataTable select_rows(std::span<const std::size_t> rows) const;
  DataTable without_column(std::string_view name) const;

 private:
  std::vector<Column> cols_;
  std::size_t n_rows_ = 0;
};

enum class Encoding { latin1, utf8 };
std::optional<Encoding> parse_encoding(std::string_view s);

struct CsvOptions {
  char delimiter = ';';
  char quote = '"';
  bool header = true;
  Encoding encoding = Encoding::latin1;
};

struct IngestSummary {
  std::size_t rows_read = 0;          // data records found in the file
  std::size_t rows_kept = 0;
  std::size_t rows_rejected = 0;      // wrong field count
  std::size_t bad_numeric_cells = 0;  // unparseable numerics kept as missing
};

struct IngestResult {
  DataTable table;
  IngestSummary summary;
};

// Reads only the schema-declared columns. Throws ConfigError when a declared
// column is absent from the header (before any data row is parsed), and
// DataError when more than half of the data rows are malformed.
IngestResult ingest_csv(const std::filesystem::path& path,
                        const std::vector<ColumnSchema>& schema,
                        const CsvOptions& options = {});

void write_csv(const DataTable& table, const std::filesystem::path& path,
               const CsvOptions& options = {});

// Removes every column with role=drop. Row count is unchanged.
DataTable drop_columns(const DataTable& table);

struct GroupKeyMap {
  // Declared order fixes group order everywhere downstream.
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
};

// Built-in state->region table for the five Brazilian regions.
GroupKeyMap brazil_region_map();

struct GroupPartition {
  std::vector<std::string> group_names;
  std::vector<std::int32_t> assignment;  // row -> group index, -1 unassigned
  std::vector<std::size_t> group_sizes;
  std::size_t unassigned = 0;

  std::vector<std::size_t> rows_of(std::size_t group) const;
};

GroupPartition partition_by_key(const DataTable& table, std::string_view key_column,
                                const GroupKeyMap& key_map);

struct TaskData {
  DataTable features;                    // label column removed, unlabeled rows dropped
  std::vector<std::int32_t> labels;      // class codes aligned with features rows
  std::vector<std::string> label_names;  // class code -> decoded value, lexicographic
  std::size_t excluded_missing_label = 0;
};

// Splits off the prediction target. Class codes follow the lexicographic
// order of the decoded label values so they are stable across groups and
// reruns. Throws DataError when fewer than two distinct labels remain.
TaskData extract_task(const DataTable& table, std::string_view label_column);

}  // namespace biasaudit
