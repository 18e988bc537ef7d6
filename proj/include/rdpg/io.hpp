#pragma once

// Edge-list and CSV file formats.
//
// Edge list: header line "# vertices: n", then one "u v" pair per line,
// 0-indexed and whitespace separated. Each undirected edge appears once;
// duplicates are accepted and collapse to one edge. Self-loops are rejected.

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdpg/model.hpp"

namespace rdpg {

Graph read_edge_list(std::istream& in);
Graph read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list(const std::filesystem::path& path, const Graph& g);

/// Numbers formatted with 17 significant digits (round-trips a double).
std::string format_double(double x);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Splits a CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rdpg
