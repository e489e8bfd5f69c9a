#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faft/core.hpp"
#include "faft/errors.hpp"

namespace faft {

/// A parsed numeric CSV: header names plus a dense value matrix.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline bool is_missing_token(std::string v) {
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return v.empty() || v == "na" || v == "nan" || v == "null" || v == ".";
}

}  // namespace detail

/// Comma-separated, "." decimal, UTF-8, header mandatory. Missing or
/// non-numeric cells are rejected with the offending row and column named.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("'" + path + "': empty file, header row required");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
    line.erase(0, 3);  // strip UTF-8 BOM
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  table.header = detail::split_csv_line(line);
  if (table.header.empty())
    throw ValidationError("'" + path + "': header row required");
  const std::size_t ncol = table.header.size();

  std::vector<double> data;
  std::size_t nrow = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != ncol)
      throw ValidationError("'" + path + "': row " + std::to_string(nrow + 2) +
                            " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(ncol));
    for (std::size_t j = 0; j < ncol; ++j) {
      const std::string& cell = fields[j];
      if (detail::is_missing_token(cell))
        throw MissingValues("'" + path + "': missing value at row " +
                            std::to_string(nrow + 2) + ", column '" +
                            table.header[j] + "'");
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw NonNumericColumn("'" + path + "': non-numeric cell '" + cell +
                               "' at row " + std::to_string(nrow + 2) +
                               ", column '" + table.header[j] + "'");
      data.push_back(v);
    }
    ++nrow;
  }
  if (nrow == 0) throw ValidationError("'" + path + "': no data rows");
  table.values.resize(static_cast<Eigen::Index>(nrow),
                      static_cast<Eigen::Index>(ncol));
  for (std::size_t i = 0; i < nrow; ++i)
    for (std::size_t j = 0; j < ncol; ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          data[i * ncol + j];
  return table;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < header.size(); ++j)
    out << (j ? "," : "") << header[j];
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << values(i, j);
    out << '\n';
  }
}

/// Builds a PanelData from a parsed CSV: the target column becomes y and is
/// excluded from the panel; W is assembled from the regressor spec.
/// Supported specs: "ar(1)+intercept" (default), "ar(1)", "intercept".
inline PanelData panel_from_csv(const CsvTable& table, const std::string& target,
                                const std::string& regressor_spec = "ar(1)+intercept") {
  int target_col = -1;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == target) target_col = static_cast<int>(j);
  if (target_col < 0)
    throw ValidationError("target column '" + target + "' not found in header");
  const Eigen::Index T = table.values.rows();
  const Eigen::Index ncol = table.values.cols();
  if (ncol < 3)
    throw ValidationError("panel needs the target plus at least two series");

  Eigen::VectorXd y = table.values.col(target_col);
  Eigen::MatrixXd X(T, ncol - 1);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < ncol; ++j)
    if (j != target_col) X.col(k++) = table.values.col(j);

  Eigen::MatrixXd W;
  if (regressor_spec == "ar(1)+intercept") {
    W.resize(T, 2);
    W.col(0).setOnes();
    W.col(1) = y;
  } else if (regressor_spec == "ar(1)") {
    W = y;
  } else if (regressor_spec == "intercept") {
    W = Eigen::MatrixXd::Ones(T, 1);
  } else {
    throw ValidationError("unknown regressor spec '" + regressor_spec +
                          "' (supported: ar(1)+intercept, ar(1), intercept)");
  }
  if (T < 10)
    throw TooShortSeries("series too short: T = " + std::to_string(T) +
                         ", need at least 10 rows");
  return PanelData(std::move(X), std::move(y), std::move(W));
}

}  // namespace faft
