#pragma once

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "biasaudit/rng.hpp"
#include "biasaudit/table.hpp"

namespace testutil {

using biasaudit::Column;
using biasaudit::ColumnKind;
using biasaudit::ColumnRole;
using biasaudit::DataTable;

inline Column categorical(const std::string& name, const std::vector<std::string>& values,
                          ColumnRole role = ColumnRole::protected_attr) {
  Column col;
  col.schema.name = name;
  col.schema.kind = ColumnKind::categorical;
  col.schema.role = role;
  for (const auto& v : values) col.codes.push_back(col.dict.intern(v));
  return col;
}

inline Column binary_col(const std::string& name, const std::vector<std::string>& values,
                         ColumnRole role = ColumnRole::label) {
  Column col = categorical(name, values, role);
  col.schema.kind = ColumnKind::binary;
  return col;
}

inline Column numeric(const std::string& name, const std::vector<double>& values,
                      ColumnRole role = ColumnRole::feature) {
  Column col;
  col.schema.name = name;
  col.schema.kind = ColumnKind::numeric;
  col.schema.role = role;
  col.values = values;
  return col;
}

template <typename... Cols>
DataTable table_of(Cols&&... cols) {
  DataTable t;
  (t.add_column(std::forward<Cols>(cols)), ...);
  return t;
}

inline std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("biasaudit_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path source_dir() { return BIASAUDIT_SOURCE_DIR; }

}  // namespace testutil
