#include "coxntf/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace coxntf {

int RawTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j)
    if (column_names[j] == name) return static_cast<int>(j);
  return -1;
}

RawTable RawTable::subset_rows(const std::vector<int>& rows) const {
  RawTable out;
  out.column_names = column_names;
  out.columns.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.columns[j].reserve(rows.size());
    for (int r : rows) out.columns[j].push_back(columns[j][static_cast<std::size_t>(r)]);
  }
  return out;
}

namespace {

// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no,
                                      const std::string& origin) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted)
    throw SchemaError(origin + ":" + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

RawTable parse_csv(const std::string& text, const std::string& origin) {
  RawTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() && line_no > 1) continue;
    auto fields = split_record(line, line_no, origin);
    if (line_no == 1) {
      if (line.empty()) throw SchemaError(origin + ": empty header row");
      table.column_names = fields;
      table.columns.resize(fields.size());
      continue;
    }
    if (fields.size() != table.column_names.size())
      throw SchemaError(origin + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(table.column_names.size()) + " fields, got " +
                        std::to_string(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j)
      table.columns[j].push_back(fields[j]);
  }
  if (table.column_names.empty()) throw SchemaError(origin + ": empty file");
  return table;
}

RawTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_double(const std::string& cell, double* out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) return false;
  *out = v;
  return true;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw SchemaError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string matrix_to_csv(const Eigen::MatrixXd& m,
                          const std::vector<std::string>& col_names,
                          const std::vector<std::string>& row_names,
                          const std::string& corner) {
  std::ostringstream out;
  const bool with_rows = !row_names.empty();
  if (with_rows) out << corner;
  for (std::size_t j = 0; j < col_names.size(); ++j) {
    if (j > 0 || with_rows) out << ',';
    out << col_names[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (with_rows) out << row_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0 || with_rows) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace coxntf
