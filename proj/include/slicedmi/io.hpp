#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicedmi/distributions.hpp"

namespace slicedmi {

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // one row per data line
};

/// Reads a comma-separated table with a mandatory header row. Every data
/// field must parse as a number.
NumericTable read_numeric_csv(std::istream& in);
NumericTable read_numeric_csv_file(const std::string& path);

/// Parses "0,2,5-7" into sorted unique column indices.
std::vector<Eigen::Index> parse_column_list(const std::string& text);

/// Selected columns of `table`; ConfigError on out-of-range indices.
Eigen::MatrixXd select_columns(const NumericTable& table, const std::vector<Eigen::Index>& cols);

/// Header x_0..x_{dx-1}, y_0..y_{dy-1}; values at full double precision so
/// a dataset reads back unchanged.
void write_dataset_csv(std::ostream& out, const PairedDataset& dataset);

}  // namespace slicedmi
