#pragma once

// CSV ingestion driven by a flat key=value schema file.
//
// Schema keys:
//   target=<col>            required; regression target or raw label column
//   group=<col>             required; protected-attribute column
//   group_positive=<value>  required; rows matching it get A=1
//   group_negative=<value>  optional; rows matching it get A=0.  When set,
//                           rows with any other group value are out of scope
//                           (dropped under drop_missing, error otherwise);
//                           when unset, every non-positive value maps to 0.
//   target_positive=<value> optional; maps the target to 1 on match, else 0
//                           (for classification targets stored as labels)
//   numeric=<c1,c2,...>     numeric feature columns, kept in schema order
//   categorical=<c1,...>    one-hot expanded (all levels, sorted)
//   drop_missing=true|false default true
//   missing_values=<v1,...> cell values treated as missing (default "", ?, NA)
//
// The parser follows RFC 4180 quoting (embedded commas/newlines/"" escapes);
// cells are whitespace-trimmed after unquoting.  Category-to-column order is
// sorted, so the encoding is deterministic for a given file + schema.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lossbal/common.hpp"
#include "lossbal/dataset.hpp"

namespace lossbal {

struct DatasetSchema {
  std::string target_column;
  std::string group_column;
  std::string group_positive_value;
  std::string group_negative_value;  // empty = not set
  std::string target_positive_value; // empty = not set
  std::vector<std::string> numeric_columns;
  std::vector<std::string> categorical_columns;
  bool drop_missing = true;
  std::set<std::string> missing_values = {"", "?", "NA"};
};

struct LoadedData {
  GroupedDataset data;
  std::vector<std::string> feature_names;
  std::vector<bool> numeric_mask;  // true = standardizable column
  std::size_t rows_dropped = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// RFC 4180 record reader over the full file contents.
inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool cell_started = false;
  std::size_t i = 0;
  auto end_cell = [&]() {
    row.push_back(trim(cell));
    cell.clear();
    cell_started = false;
  };
  auto end_row = [&]() {
    end_cell();
    // skip completely empty trailing lines
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
    row.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      ++i;
    } else if (c == '"' && !cell_started) {
      quoted = true;
      cell_started = true;
      ++i;
    } else if (c == ',') {
      end_cell();
      ++i;
    } else if (c == '\r') {
      ++i;  // handled with the following \n (or ignored)
    } else if (c == '\n') {
      end_row();
      ++i;
    } else {
      cell += c;
      cell_started = true;
      ++i;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted cell at end of file");
  if (!cell.empty() || !row.empty()) end_row();
  return rows;
}

}  // namespace detail

inline DatasetSchema parse_schema_string(const std::string& text) {
  DatasetSchema s;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw SchemaError("schema line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key == "target") s.target_column = val;
    else if (key == "group") s.group_column = val;
    else if (key == "group_positive") s.group_positive_value = val;
    else if (key == "group_negative") s.group_negative_value = val;
    else if (key == "target_positive") s.target_positive_value = val;
    else if (key == "numeric") s.numeric_columns = detail::split_list(val);
    else if (key == "categorical") s.categorical_columns = detail::split_list(val);
    else if (key == "drop_missing") {
      if (val == "true") s.drop_missing = true;
      else if (val == "false") s.drop_missing = false;
      else throw SchemaError("schema: drop_missing must be true or false");
    } else if (key == "missing_values") {
      s.missing_values = {""};
      for (const auto& v : detail::split_list(val)) s.missing_values.insert(v);
    } else {
      throw SchemaError("schema: unknown key '" + key + "'");
    }
  }
  if (s.target_column.empty()) throw SchemaError("schema: 'target' is required");
  if (s.group_column.empty()) throw SchemaError("schema: 'group' is required");
  if (s.group_positive_value.empty())
    throw SchemaError("schema: 'group_positive' is required");
  if (s.numeric_columns.empty() && s.categorical_columns.empty())
    throw SchemaError("schema: at least one numeric or categorical column is required");
  return s;
}

inline DatasetSchema parse_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("schema: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema_string(buf.str());
}

inline LoadedData load_csv(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = detail::parse_csv_text(buf.str());
  if (rows.empty()) throw DataError("csv: '" + path + "' has no header row");

  const std::vector<std::string>& header = rows.front();
  std::map<std::string, std::size_t> col_of;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (col_of.count(header[j]))
      throw SchemaError("csv: duplicate header column '" + header[j] + "'");
    col_of[header[j]] = j;
  }
  auto col = [&](const std::string& name) {
    const auto it = col_of.find(name);
    if (it == col_of.end())
      throw SchemaError("csv: column '" + name + "' not found in header of " + path);
    return it->second;
  };
  const std::size_t target_col = col(schema.target_column);
  const std::size_t group_col = col(schema.group_column);
  std::vector<std::size_t> num_cols, cat_cols;
  for (const auto& c : schema.numeric_columns) num_cols.push_back(col(c));
  for (const auto& c : schema.categorical_columns) cat_cols.push_back(col(c));

  auto is_missing = [&](const std::string& v) { return schema.missing_values.count(v) > 0; };

  // First pass: decide retained rows, collect category levels.
  struct Parsed {
    std::size_t row;
    int group;
  };
  std::vector<Parsed> keep;
  std::vector<std::set<std::string>> levels(cat_cols.size());
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != header.size())
      throw DataError("csv: row " + std::to_string(r + 1) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    bool missing = is_missing(cells[target_col]) || is_missing(cells[group_col]);
    for (std::size_t j : num_cols) missing = missing || is_missing(cells[j]);
    for (std::size_t j : cat_cols) missing = missing || is_missing(cells[j]);

    int group = -1;
    if (!missing) {
      const std::string& gv = cells[group_col];
      if (gv == schema.group_positive_value) group = 1;
      else if (schema.group_negative_value.empty()) group = 0;
      else if (gv == schema.group_negative_value) group = 0;
      // else out of scope: group stays -1
    }

    if (missing || group < 0) {
      if (schema.drop_missing) {
        ++dropped;
        continue;
      }
      throw DataError("csv: row " + std::to_string(r + 1) +
                      (missing ? ": missing value in a schema column"
                               : ": group value '" + cells[group_col] + "' out of scope"));
    }
    keep.push_back({r, group});
    for (std::size_t k = 0; k < cat_cols.size(); ++k) levels[k].insert(cells[cat_cols[k]]);
  }
  if (keep.empty()) throw DataError("csv: no rows retained from '" + path + "'");

  // Column layout: numeric block then one-hot blocks, levels sorted.
  std::vector<std::string> names;
  std::vector<bool> mask;
  for (const auto& c : schema.numeric_columns) {
    names.push_back(c);
    mask.push_back(true);
  }
  std::vector<std::map<std::string, Index>> level_index(cat_cols.size());
  Index next = static_cast<Index>(names.size());
  for (std::size_t k = 0; k < cat_cols.size(); ++k) {
    for (const auto& lv : levels[k]) {
      level_index[k][lv] = next++;
      names.push_back(schema.categorical_columns[k] + "=" + lv);
      mask.push_back(false);
    }
  }

  const Index n = static_cast<Index>(keep.size());
  const Index d = static_cast<Index>(names.size());
  Matrix x = Matrix::Zero(n, d);
  Vector y(n);
  std::vector<int> groups(keep.size());
  auto parse_num = [&](const std::string& cell, std::size_t r, std::size_t j) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      return v;
    } catch (const std::exception&) {
      throw DataError("csv: row " + std::to_string(r + 1) + ", column '" + header[j] +
                      "': cannot parse '" + cell + "' as a number");
    }
  };
  for (Index i = 0; i < n; ++i) {
    const auto& cells = rows[keep[static_cast<std::size_t>(i)].row];
    const std::size_t r = keep[static_cast<std::size_t>(i)].row;
    groups[static_cast<std::size_t>(i)] = keep[static_cast<std::size_t>(i)].group;
    if (!schema.target_positive_value.empty())
      y(i) = cells[target_col] == schema.target_positive_value ? 1.0 : 0.0;
    else
      y(i) = parse_num(cells[target_col], r, target_col);
    for (std::size_t k = 0; k < num_cols.size(); ++k)
      x(i, static_cast<Index>(k)) = parse_num(cells[num_cols[k]], r, num_cols[k]);
    for (std::size_t k = 0; k < cat_cols.size(); ++k)
      x(i, level_index[k].at(cells[cat_cols[k]])) = 1.0;
  }

  return LoadedData{GroupedDataset(std::move(x), std::move(y), std::move(groups)),
                    std::move(names), std::move(mask), dropped};
}

}  // namespace lossbal
