#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace relight::textio {

// 17 significant digits: enough to round-trip any double, so rerunning a
// campaign and diffing output files is a meaningful determinism check.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

// Header row plus pre-rendered cells. All campaign CSVs go through here.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Plain numeric CSV, one row per line, no header (embedding sets, generator
// dictionaries). Width must be consistent.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Binary layout: uint64 rows, uint64 cols, then rows*cols little-endian
// doubles in row-major order.
Eigen::MatrixXd read_binary_matrix(const std::string& path);
void write_binary_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Flat vector, one value per line.
Eigen::VectorXd read_csv_vector(const std::string& path);
void write_csv_vector(const std::string& path, const Eigen::VectorXd& v);

}  // namespace relight::textio
