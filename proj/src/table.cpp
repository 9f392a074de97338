#include "biasaudit/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "biasaudit/errors.hpp"

namespace biasaudit {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::binary: return "binary";
  }
  return "?";
}

std::string_view to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::feature: return "feature";
    case ColumnRole::label: return "label";
    case ColumnRole::protected_attr: return "protected";
    case ColumnRole::group_key: return "group_key";
    case ColumnRole::drop: return "drop";
  }
  return "?";
}

std::optional<ColumnKind> parse_column_kind(std::string_view s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "binary") return ColumnKind::binary;
  return std::nullopt;
}

std::optional<ColumnRole> parse_column_role(std::string_view s) {
  if (s == "feature") return ColumnRole::feature;
  if (s == "label") return ColumnRole::label;
  if (s == "protected") return ColumnRole::protected_attr;
  if (s == "group_key") return ColumnRole::group_key;
  if (s == "drop") return ColumnRole::drop;
  return std::nullopt;
}

std::optional<Encoding> parse_encoding(std::string_view s) {
  if (s == "latin1" || s == "latin-1" || s == "iso-8859-1") return Encoding::latin1;
  if (s == "utf8" || s == "utf-8") return Encoding::utf8;
  return std::nullopt;
}

std::int32_t Dictionary::intern(std::string_view value) {
  auto it = codes_.find(std::string(value));
  if (it != codes_.end()) return it->second;
  auto code = static_cast<std::int32_t>(values_.size());
  values_.emplace_back(value);
  codes_.emplace(values_.back(), code);
  return code;
}

std::optional<std::int32_t> Dictionary::find(std::string_view value) const {
  auto it = codes_.find(std::string(value));
  if (it == codes_.end()) return std::nullopt;
  return it->second;
}

const std::string& Dictionary::decode(std::int32_t code) const {
  if (code < 0 || static_cast<std::size_t>(code) >= values_.size()) {
    throw DataError("dictionary code out of range: " + std::to_string(code));
  }
  return values_[static_cast<std::size_t>(code)];
}

bool Column::is_missing(std::size_t row) const {
  if (is_numeric()) return std::isnan(values[row]);
  auto mc = missing_code();
  return mc && codes[row] == *mc;
}

const Column* DataTable::find_column(std::string_view name) const {
  for (const auto& c : cols_) {
    if (c.schema.name == name) return &c;
  }
  return nullptr;
}

std::optional<std::size_t> DataTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (cols_[i].schema.name == name) return i;
  }
  return std::nullopt;
}

void DataTable::add_column(Column col) {
  if (!cols_.empty() && col.size() != n_rows_) {
    throw DataError("column '" + col.schema.name + "' has " + std::to_string(col.size()) +
                    " rows, table has " + std::to_string(n_rows_));
  }
  if (find_column(col.schema.name) != nullptr) {
    throw DataError("duplicate column name: " + col.schema.name);
  }
  if (cols_.empty()) n_rows_ = col.size();
  cols_.push_back(std::move(col));
}

DataTable DataTable::select_rows(std::span<const std::size_t> rows) const {
  DataTable out;
  for (const auto& c : cols_) {
    Column nc;
    nc.schema = c.schema;
    nc.dict = c.dict;
    if (c.is_numeric()) {
      nc.values.reserve(rows.size());
      for (auto r : rows) nc.values.push_back(c.values[r]);
    } else {
      nc.codes.reserve(rows.size());
      for (auto r : rows) nc.codes.push_back(c.codes[r]);
    }
    out.add_column(std::move(nc));
  }
  out.n_rows_ = rows.size();
  return out;
}

DataTable DataTable::without_column(std::string_view name) const {
  DataTable out;
  for (const auto& c : cols_) {
    if (c.schema.name == name) continue;
    out.add_column(c);
  }
  return out;
}

namespace {

std::string latin1_to_utf8(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (unsigned char c : in) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

// Streaming RFC4180-style parser: quoted fields may contain the delimiter,
// doubled quotes, and embedded line breaks. Calls on_record per record.
void parse_csv_stream(std::istream& in, char delimiter, char quote,
                      const std::function<void(std::vector<std::string>&)>& on_record) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;

  char buf[1 << 16];
  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    on_record(fields);
    fields.clear();
    saw_any = false;
  };

  bool pending_quote = false;  // last char inside quotes was a quote
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      char c = buf[i];
      if (in_quotes) {
        if (pending_quote) {
          pending_quote = false;
          if (c == quote) {  // escaped quote
            field.push_back(quote);
            continue;
          }
          in_quotes = false;  // closing quote; reprocess c below
        } else if (c == quote) {
          pending_quote = true;
          continue;
        } else {
          field.push_back(c);
          continue;
        }
      }
      if (c == quote && field.empty() && !saw_any) {
        in_quotes = true;
        saw_any = true;
        continue;
      }
      if (c == delimiter) {
        end_field();
        saw_any = false;
      } else if (c == '\n') {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        end_record();
      } else {
        field.push_back(c);
        saw_any = true;
      }
    }
    if (n < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  if (pending_quote) in_quotes = false;
  if (!field.empty() || !fields.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    end_record();
  }
}

bool parse_numeric_token(std::string_view tok, double& out) {
  std::size_t b = 0, e = tok.size();
  while (b < e && (tok[b] == ' ' || tok[b] == '\t')) ++b;
  while (e > b && (tok[e - 1] == ' ' || tok[e - 1] == '\t')) --e;
  if (b == e) return false;
  auto first = tok.data() + b;
  auto last = tok.data() + e;
  double v = 0;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last || !std::isfinite(v)) return false;
  out = v;
  return true;
}

bool is_missing_token(const std::string& tok, const std::vector<std::string>& missing) {
  return std::find(missing.begin(), missing.end(), tok) != missing.end();
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path,
                        const std::vector<ColumnSchema>& schema,
                        const CsvOptions& options) {
  if (schema.empty()) throw ConfigError("schema declares no columns");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file: " + path.string());

  IngestResult result;
  std::vector<Column> cols(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) cols[i].schema = schema[i];

  std::vector<int> file_index(schema.size(), -1);
  std::size_t expected_fields = 0;
  bool have_layout = false;
  bool header_row = options.header;

  auto transcode = [&](std::string& s) {
    if (options.encoding == Encoding::latin1) s = latin1_to_utf8(s);
  };

  auto resolve_headerless = [&](std::size_t n_fields) {
    expected_fields = n_fields;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].index < 0) {
        throw ConfigError("column '" + schema[i].name +
                          "' needs an explicit index when the CSV has no header");
      }
      if (static_cast<std::size_t>(schema[i].index) >= n_fields) {
        throw ConfigError("column '" + schema[i].name + "' index " +
                          std::to_string(schema[i].index) + " out of range (row has " +
                          std::to_string(n_fields) + " fields)");
      }
      file_index[i] = schema[i].index;
    }
    have_layout = true;
  };

  auto ingest_record = [&](std::vector<std::string>& fields) {
    if (fields.size() == 1 && fields[0].empty()) return;  // blank line
    if (header_row) {
      header_row = false;
      for (auto& f : fields) transcode(f);
      expected_fields = fields.size();
      for (std::size_t i = 0; i < schema.size(); ++i) {
        auto it = std::find(fields.begin(), fields.end(), schema[i].name);
        if (it == fields.end()) {
          throw ConfigError("schema column '" + schema[i].name + "' not found in CSV header of " +
                            path.string());
        }
        file_index[i] = static_cast<int>(it - fields.begin());
      }
      have_layout = true;
      return;
    }
    if (!have_layout) resolve_headerless(fields.size());

    ++result.summary.rows_read;
    if (fields.size() != expected_fields) {
      ++result.summary.rows_rejected;
      return;
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      std::string& tok = fields[static_cast<std::size_t>(file_index[i])];
      transcode(tok);
      Column& col = cols[i];
      if (col.is_numeric()) {
        double v = 0;
        if (is_missing_token(tok, schema[i].missing_tokens)) {
          col.values.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (parse_numeric_token(tok, v)) {
          col.values.push_back(v);
        } else {
          col.values.push_back(std::numeric_limits<double>::quiet_NaN());
          ++result.summary.bad_numeric_cells;
        }
      } else {
        if (is_missing_token(tok, schema[i].missing_tokens)) {
          col.codes.push_back(col.dict.intern(kMissingCategory));
        } else {
          col.codes.push_back(col.dict.intern(tok));
        }
      }
    }
    ++result.summary.rows_kept;
  };

  parse_csv_stream(in, options.delimiter, options.quote, ingest_record);

  if (options.header && header_row) {
    throw DataError("CSV file is empty: " + path.string());
  }
  if (result.summary.rows_read > 0 &&
      result.summary.rows_rejected * 2 > result.summary.rows_read) {
    std::ostringstream msg;
    msg << "more than half of the data rows in " << path.string() << " are malformed ("
        << result.summary.rows_rejected << " of " << result.summary.rows_read
        << "); check the delimiter (currently '" << options.delimiter << "')";
    throw DataError(msg.str());
  }

  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == ColumnKind::binary) {
      std::size_t distinct = cols[i].dict.size();
      if (cols[i].dict.find(kMissingCategory)) --distinct;
      if (distinct > 2) {
        throw DataError("binary column '" + schema[i].name + "' has " +
                        std::to_string(distinct) + " distinct values");
      }
    }
    result.table.add_column(std::move(cols[i]));
  }
  return result;
}

namespace {

std::string csv_quote(const std::string& s, const CsvOptions& opt) {
  bool needs = s.find(opt.delimiter) != std::string::npos ||
               s.find(opt.quote) != std::string::npos || s.find('\n') != std::string::npos ||
               s.find('\r') != std::string::npos;
  if (!needs) return s;
  std::string out(1, opt.quote);
  for (char c : s) {
    if (c == opt.quote) out.push_back(opt.quote);
    out.push_back(c);
  }
  out.push_back(opt.quote);
  return out;
}

std::string utf8_to_latin1(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(in[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if ((c & 0xe0) == 0xc0 && i + 1 < in.size()) {
      unsigned char c2 = static_cast<unsigned char>(in[i + 1]);
      out.push_back(static_cast<char>(((c & 0x1f) << 6) | (c2 & 0x3f)));
      ++i;
    } else {
      out.push_back('?');  // not representable in latin-1
      while (i + 1 < in.size() && (static_cast<unsigned char>(in[i + 1]) & 0xc0) == 0x80) ++i;
    }
  }
  return out;
}

std::string format_numeric_cell(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

void write_csv(const DataTable& table, const std::filesystem::path& path,
               const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file: " + path.string());

  auto emit = [&](const std::string& cell, bool last) {
    std::string s = csv_quote(cell, options);
    if (options.encoding == Encoding::latin1) s = utf8_to_latin1(s);
    out << s;
    if (!last) out << options.delimiter;
  };

  if (options.header) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      emit(table.column(c).schema.name, c + 1 == table.n_cols());
    }
    out << '\n';
  }
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      const Column& col = table.column(c);
      std::string cell;
      if (col.is_numeric()) {
        cell = std::isnan(col.values[r]) ? "" : format_numeric_cell(col.values[r]);
      } else {
        cell = col.dict.decode(col.codes[r]);
      }
      emit(cell, c + 1 == table.n_cols());
    }
    out << '\n';
  }
}

DataTable drop_columns(const DataTable& table) {
  DataTable out;
  for (const auto& c : table.columns()) {
    if (c.schema.role == ColumnRole::drop) continue;
    out.add_column(c);
  }
  return out;
}

GroupKeyMap brazil_region_map() {
  return GroupKeyMap{{
      {"North", {"AC", "AP", "AM", "PA", "RO", "RR", "TO"}},
      {"Northeast", {"AL", "BA", "CE", "MA", "PB", "PE", "PI", "RN", "SE"}},
      {"Central-West", {"DF", "GO", "MT", "MS"}},
      {"Southeast", {"ES", "MG", "RJ", "SP"}},
      {"South", {"PR", "RS", "SC"}},
  }};
}

std::vector<std::size_t> GroupPartition::rows_of(std::size_t group) const {
  std::vector<std::size_t> rows;
  rows.reserve(group < group_sizes.size() ? group_sizes[group] : 0);
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] == static_cast<std::int32_t>(group)) rows.push_back(r);
  }
  return rows;
}

GroupPartition partition_by_key(const DataTable& table, std::string_view key_column,
                                const GroupKeyMap& key_map) {
  if (key_map.groups.empty()) throw ConfigError("empty group key map");
  const Column* col = table.find_column(key_column);
  if (col == nullptr) {
    throw DataError("group key column '" + std::string(key_column) + "' not found");
  }
  if (col->is_numeric()) {
    throw DataError("group key column '" + std::string(key_column) + "' must be categorical");
  }

  GroupPartition part;
  std::unordered_map<std::string, std::int32_t> key_to_group;
  for (const auto& [name, keys] : key_map.groups) {
    part.group_names.push_back(name);
    auto g = static_cast<std::int32_t>(part.group_names.size() - 1);
    for (const auto& k : keys) {
      auto [it, inserted] = key_to_group.emplace(k, g);
      if (!inserted) throw ConfigError("key value '" + k + "' mapped to more than one group");
    }
  }
  part.group_sizes.assign(part.group_names.size(), 0);

  // Resolve key values through the dictionary once, then assign per row.
  std::vector<std::int32_t> group_of_code(col->dict.size(), -1);
  for (std::size_t code = 0; code < col->dict.size(); ++code) {
    auto it = key_to_group.find(col->dict.values()[code]);
    if (it != key_to_group.end()) group_of_code[code] = it->second;
  }

  part.assignment.resize(table.n_rows(), -1);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::int32_t g = group_of_code[static_cast<std::size_t>(col->codes[r])];
    part.assignment[r] = g;
    if (g >= 0) {
      ++part.group_sizes[static_cast<std::size_t>(g)];
    } else {
      ++part.unassigned;
    }
  }
  return part;
}

TaskData extract_task(const DataTable& table, std::string_view label_column) {
  const Column* col = table.find_column(label_column);
  if (col == nullptr) {
    throw DataError("label column '" + std::string(label_column) + "' not found");
  }
  if (col->is_numeric()) {
    throw DataError("label column '" + std::string(label_column) +
                    "' must be categorical or binary");
  }

  auto missing = col->missing_code();
  std::vector<std::size_t> kept;
  kept.reserve(table.n_rows());
  TaskData task;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (missing && col->codes[r] == *missing) {
      ++task.excluded_missing_label;
    } else {
      kept.push_back(r);
    }
  }

  // Class codes follow lexicographic order of the decoded values.
  std::map<std::string, std::int32_t> observed;
  for (auto r : kept) observed.emplace(col->dict.decode(col->codes[r]), 0);
  if (observed.size() < 2) {
    throw DataError("degenerate task: label column '" + std::string(label_column) + "' has " +
                    std::to_string(observed.size()) + " distinct value(s)");
  }
  std::int32_t next = 0;
  for (auto& [name, code] : observed) {
    code = next++;
    task.label_names.push_back(name);
  }

  task.labels.reserve(kept.size());
  for (auto r : kept) {
    task.labels.push_back(observed.at(col->dict.decode(col->codes[r])));
  }
  task.features = table.select_rows(kept).without_column(label_column);
  return task;
}

}  // namespace biasaudit
