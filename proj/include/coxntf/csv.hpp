#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "coxntf/types.hpp"

namespace coxntf {

// Column-oriented view of a CSV file before typing/encoding.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<std::string>> columns;  // same length per column

  std::size_t n_rows() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t n_cols() const { return columns.size(); }
  int column_index(const std::string& name) const;  // -1 if absent

  RawTable subset_rows(const std::vector<int>& rows) const;
};

RawTable read_csv(const std::string& path);
RawTable parse_csv(const std::string& text, const std::string& origin = "<string>");

std::string format_double(double v);
bool parse_double(const std::string& cell, double* out);

// All file output goes through here: write to a temp file in the same
// directory, then rename, so interrupted runs never leave truncated files.
void atomic_write_file(const std::string& path, const std::string& content);

std::string matrix_to_csv(const Eigen::MatrixXd& m,
                          const std::vector<std::string>& col_names,
                          const std::vector<std::string>& row_names = {},
                          const std::string& corner = "row");

}  // namespace coxntf
