#pragma once

#include "kpl/functional.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kpl::io {

/// Output functions read from a long-format table (sample_id, theta, value).
struct FunctionTable {
  std::vector<long> sample_ids;  ///< sorted ascending
  std::vector<SampledFunction> functions;
  double domain_lo = 0.0;  ///< original domain, mapped affinely onto [0, 1]
  double domain_hi = 1.0;
};

/// Reads (sample_id, theta, value) rows. Empty or NaN values are dropped.
/// Rows are grouped by sample_id and sorted by theta. When any theta lies
/// outside [0, 1] (or `domain` is given) locations are mapped affinely onto [0, 1].
FunctionTable read_functions_csv(const std::filesystem::path& path,
                                 std::optional<std::pair<double, double>> domain = std::nullopt);
void write_functions_csv(const std::filesystem::path& path, const std::vector<SampledFunction>& functions,
                         const std::vector<long>& sample_ids = {});

/// Dense vector inputs, one row per sample (optional header row).
std::vector<InputPoint> read_vector_inputs_csv(const std::filesystem::path& path);
void write_vector_inputs_csv(const std::filesystem::path& path, const std::vector<InputPoint>& inputs);

/// Matrix inputs as (sample_id, theta, c1..ck); all samples must share the location grid.
std::vector<InputPoint> read_matrix_inputs_csv(const std::filesystem::path& path);
void write_matrix_inputs_csv(const std::filesystem::path& path, const std::vector<InputPoint>& inputs,
                             const Eigen::VectorXd& locations);

/// Plain numeric matrix with an optional header line.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

/// Splits one CSV line on commas; no quoting support.
std::vector<std::string> split_csv_line(const std::string& line);
/// Parses a numeric cell; empty, "nan" or "NA" give NaN.
double parse_cell(const std::string& cell);

}  // namespace kpl::io
