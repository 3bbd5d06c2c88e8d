#include "cvshrink/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "cvshrink/io.hpp"

namespace cvshrink {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one record, honoring double-quoted fields with "" escapes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  if (quoted)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(field));
  return fields;
}

double parse_number(const std::string& field, std::size_t line_no, const std::string& column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column '" + column +
                                           "': cannot parse '" + field + "' as a finite number");
  return value;
}

}  // namespace

Dataset ingest_csv_text(const std::string& text, const std::string& target_column,
                        const std::vector<std::string>& categorical_columns, Task task) {
  // Split into lines, tolerating CRLF and a trailing newline.
  std::vector<std::string> lines;
  std::string current;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) lines.push_back(current);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty file");

  const std::vector<std::string> header = split_record(lines.front(), 1);
  const std::size_t width = header.size();

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t target_idx = column_index(target_column);

  std::set<std::size_t> categorical_idx;
  for (const auto& name : categorical_columns) {
    const std::size_t idx = column_index(name);
    if (idx == target_idx)
      throw Error(ErrorCode::ConfigError, "target column '" + name + "' cannot be categorical");
    categorical_idx.insert(idx);
  }

  // First pass: parse cells, collect categorical levels.
  const std::size_t n = lines.size() - 1;
  if (n < 2) throw Error(ErrorCode::InvalidSizes, "need at least 2 data rows, got " + std::to_string(n));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(n);
  std::map<std::size_t, std::set<std::string>> levels;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t line_no = r + 2;
    auto fields = split_record(lines[r + 1], line_no);
    if (fields.size() != width)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " fields, got " +
                                             std::to_string(fields.size()));
    for (std::size_t c = 0; c < width; ++c) {
      if (fields[c].empty())
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ", column '" + header[c] + "': missing value");
      if (categorical_idx.count(c)) levels[c].insert(fields[c]);
    }
    rows.push_back(std::move(fields));
  }

  // Layout: header order preserved, categorical columns expanded in place.
  struct ColumnPlan {
    std::size_t source;
    bool categorical;
    std::string name;
    std::string level;  // categorical only
  };
  std::vector<ColumnPlan> plan;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == target_idx) continue;
    if (categorical_idx.count(c)) {
      for (const auto& level : levels[c]) plan.push_back({c, true, header[c] + "=" + level, level});
    } else {
      plan.push_back({c, false, header[c], ""});
    }
  }

  Dataset data;
  data.task = task;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(plan.size()));
  data.targets.resize(static_cast<Eigen::Index>(n));
  data.feature_names.reserve(plan.size());
  for (const auto& col : plan) data.feature_names.push_back(col.name);

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t line_no = r + 2;
    for (std::size_t c = 0; c < plan.size(); ++c) {
      const auto& col = plan[c];
      const std::string& field = rows[r][col.source];
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          col.categorical ? (field == col.level ? 1.0 : 0.0) : parse_number(field, line_no, col.name);
    }
    const double y = parse_number(rows[r][target_idx], line_no, target_column);
    if (task == Task::binary && y != 0.0 && y != 1.0)
      throw Error(ErrorCode::NonBinaryTarget,
                  "line " + std::to_string(line_no) + ": target " + rows[r][target_idx] + " not in {0,1}");
    data.targets[static_cast<Eigen::Index>(r)] = y;
  }
  validate(data);
  return data;
}

Dataset ingest_csv(const std::string& path, const std::string& target_column,
                   const std::vector<std::string>& categorical_columns, Task task) {
  return ingest_csv_text(read_file(path), target_column, categorical_columns, task);
}

}  // namespace cvshrink
