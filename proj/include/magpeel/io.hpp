#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magpeel/metric.hpp"
#include "magpeel/paths.hpp"

namespace magpeel::io {

/// A numeric table with optional column labels (from a header row or a JSON
/// "labels" field).
struct Table {
  Matrix<double> values;
  std::vector<std::string> labels;
};

enum class Format { Auto, Csv, Json };

Format format_from_string(const std::string& s);

/// CSV with an optional header row, or JSON {labels, matrix} / {labels, points}.
Table read_table(const std::filesystem::path& path, Format format = Format::Auto);
Table parse_csv_table(const std::string& text);
Table parse_json_table(const std::string& text);

/// A probability vector: JSON array, or CSV with one row or one column.
Vector<double> read_vector(const std::filesystem::path& path);

/// Decimal at 17 significant digits; parsing it back gives the same double.
std::string format_double(double v);

std::string matrix_to_csv(const Matrix<double>& m, const std::vector<std::string>& labels = {},
                          const std::string& comment = {});

/// Node CSV: id,label,lon,lat. Features: CSV rows "id,f1,...,fD" (header
/// optional) or JSON {"id": [..]}, aligned to nodes by id.
paths::NodeTable read_node_table(const std::filesystem::path& nodes, const std::filesystem::path& features);
std::string nodes_to_csv(const paths::NodeTable& t);
std::string features_to_csv(const paths::NodeTable& t);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace magpeel::io
