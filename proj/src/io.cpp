#include "slicedmi/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "slicedmi/errors.hpp"

namespace slicedmi {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto a = field.find_first_not_of(" \t\r");
    const auto b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string{} : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

NumericTable read_numeric_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV: empty input, header row required");
  table.header = split_fields(line);
  const auto cols = table.header.size();
  std::vector<double> flat;
  Eigen::Index rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                        " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size()) {
        throw ConfigError("CSV line " + std::to_string(line_no) + ": not a number: '" + f + "'");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  table.values.resize(rows, static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(cols); ++j) {
      table.values(i, j) = flat[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)];
    }
  }
  return table;
}

NumericTable read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_numeric_csv(in);
}

std::vector<Eigen::Index> parse_column_list(const std::string& text) {
  std::vector<Eigen::Index> cols;
  std::stringstream ss(text);
  std::string item;
  auto to_index = [&](const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || v < 0) {
      throw ConfigError("bad column index '" + s + "' in '" + text + "'");
    }
    return static_cast<Eigen::Index>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      cols.push_back(to_index(item));
    } else {
      const auto lo = to_index(item.substr(0, dash));
      const auto hi = to_index(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("bad column range '" + item + "'");
      for (auto c = lo; c <= hi; ++c) cols.push_back(c);
    }
  }
  if (cols.empty()) throw ConfigError("empty column list");
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

Eigen::MatrixXd select_columns(const NumericTable& table, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(table.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= table.values.cols()) {
      throw ConfigError("column " + std::to_string(cols[j]) + " out of range (table has " +
                        std::to_string(table.values.cols()) + " columns)");
    }
    out.col(static_cast<Eigen::Index>(j)) = table.values.col(cols[j]);
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const PairedDataset& dataset) {
  const Eigen::Index dx = dataset.x.cols();
  const Eigen::Index dy = dataset.y.cols();
  for (Eigen::Index j = 0; j < dx; ++j) out << (j ? "," : "") << "x_" << j;
  for (Eigen::Index j = 0; j < dy; ++j) out << ",y_" << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    for (Eigen::Index j = 0; j < dx + dy; ++j) {
      const double v = j < dx ? dataset.x(i, j) : dataset.y(i, j - dx);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace slicedmi
