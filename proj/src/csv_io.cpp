#include "kpl/csv_io.hpp"

#include "kpl/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kpl::io {

using detail::require;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

bool is_header(const std::vector<std::string>& row) {
  for (const auto& c : row) {
    const auto t = trim(c);
    if (t.empty()) continue;
    double v = 0.0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      if (t != "nan" && t != "NaN" && t != "NA") return true;
    }
  }
  return false;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell) {
  const auto t = trim(cell);
  if (t.empty() || t == "nan" || t == "NaN" || t == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidArgument("not a number: '" + t + "'");
  return v;
}

FunctionTable read_functions_csv(const std::filesystem::path& path,
                                 std::optional<std::pair<double, double>> domain) {
  auto rows = read_rows(path);
  if (!rows.empty() && is_header(rows.front())) rows.erase(rows.begin());
  std::map<long, std::vector<std::pair<double, double>>> grouped;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : rows) {
    require(r.size() >= 3, "functions csv: expected columns sample_id,theta,value");
    const double id = parse_cell(r[0]);
    const double theta = parse_cell(r[1]);
    const double value = parse_cell(r[2]);
    require(std::isfinite(id) && std::isfinite(theta), "functions csv: missing sample_id or theta");
    auto& bucket = grouped[static_cast<long>(id)];
    if (!std::isfinite(value)) continue;
    bucket.emplace_back(theta, value);
    lo = std::min(lo, theta);
    hi = std::max(hi, theta);
  }
  FunctionTable table;
  if (domain) {
    table.domain_lo = domain->first;
    table.domain_hi = domain->second;
  } else if (lo < 0.0 || hi > 1.0) {
    table.domain_lo = lo;
    table.domain_hi = hi;
  }
  for (auto& [id, obs] : grouped) {
    require(!obs.empty(), "functions csv: sample " + std::to_string(id) + " has no observed values");
    std::sort(obs.begin(), obs.end());
    Eigen::VectorXd t(static_cast<Eigen::Index>(obs.size()));
    Eigen::VectorXd v(t.size());
    for (std::size_t p = 0; p < obs.size(); ++p) {
      t[static_cast<Eigen::Index>(p)] = obs[p].first;
      v[static_cast<Eigen::Index>(p)] = obs[p].second;
    }
    table.sample_ids.push_back(id);
    if (table.domain_lo != 0.0 || table.domain_hi != 1.0) {
      table.functions.push_back(rescale_domain(t, v, table.domain_lo, table.domain_hi));
    } else {
      table.functions.emplace_back(std::move(t), std::move(v));
    }
  }
  return table;
}

void write_functions_csv(const std::filesystem::path& path, const std::vector<SampledFunction>& functions,
                         const std::vector<long>& sample_ids) {
  require(sample_ids.empty() || sample_ids.size() == functions.size(), "write_functions_csv: id count mismatch");
  auto out = open_out(path);
  out << "sample_id,theta,value\n";
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const long id = sample_ids.empty() ? static_cast<long>(i) : sample_ids[i];
    const auto& f = functions[i];
    for (Eigen::Index p = 0; p < f.size(); ++p) out << id << ',' << f.locations()[p] << ',' << f.values()[p] << '\n';
  }
}

std::vector<InputPoint> read_vector_inputs_csv(const std::filesystem::path& path) {
  const auto m = read_matrix_csv(path);
  std::vector<InputPoint> inputs;
  inputs.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) inputs.emplace_back(Eigen::VectorXd(m.row(i).transpose()));
  return inputs;
}

void write_vector_inputs_csv(const std::filesystem::path& path, const std::vector<InputPoint>& inputs) {
  auto out = open_out(path);
  for (const auto& x : inputs) {
    require(!x.is_matrix(), "write_vector_inputs_csv: matrix input");
    const auto& v = x.data();
    for (Eigen::Index k = 0; k < v.rows(); ++k) out << (k ? "," : "") << v(k, 0);
    out << '\n';
  }
}

std::vector<InputPoint> read_matrix_inputs_csv(const std::filesystem::path& path) {
  auto rows = read_rows(path);
  if (!rows.empty() && is_header(rows.front())) rows.erase(rows.begin());
  std::map<long, std::vector<std::vector<double>>> grouped;
  std::size_t channels = 0;
  for (const auto& r : rows) {
    require(r.size() >= 3, "matrix inputs csv: expected sample_id,theta,c1..ck");
    if (channels == 0) channels = r.size() - 2;
    require(r.size() - 2 == channels, "matrix inputs csv: ragged channel count");
    std::vector<double> vals;
    for (const auto& c : r) vals.push_back(parse_cell(c));
    grouped[static_cast<long>(vals[0])].push_back(std::move(vals));
  }
  std::vector<InputPoint> inputs;
  Eigen::Index rows_per_sample = -1;
  for (auto& [id, block] : grouped) {
    std::sort(block.begin(), block.end(), [](const auto& a, const auto& b) { return a[1] < b[1]; });
    if (rows_per_sample < 0) rows_per_sample = static_cast<Eigen::Index>(block.size());
    require(static_cast<Eigen::Index>(block.size()) == rows_per_sample,
            "matrix inputs csv: samples must share the location grid");
    Eigen::MatrixXd m(rows_per_sample, static_cast<Eigen::Index>(channels));
    for (Eigen::Index p = 0; p < rows_per_sample; ++p)
      for (std::size_t c = 0; c < channels; ++c) m(p, static_cast<Eigen::Index>(c)) = block[p][c + 2];
    require(m.allFinite(), "matrix inputs csv: missing channel values are not supported");
    inputs.emplace_back(std::move(m));
  }
  return inputs;
}

void write_matrix_inputs_csv(const std::filesystem::path& path, const std::vector<InputPoint>& inputs,
                             const Eigen::VectorXd& locations) {
  auto out = open_out(path);
  if (!inputs.empty()) {
    out << "sample_id,theta";
    for (Eigen::Index c = 0; c < inputs.front().cols(); ++c) out << ",c" << (c + 1);
    out << '\n';
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& m = inputs[i].data();
    require(m.rows() == locations.size(), "write_matrix_inputs_csv: location count mismatch");
    for (Eigen::Index p = 0; p < m.rows(); ++p) {
      out << i << ',' << locations[p];
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << m(p, c);
      out << '\n';
    }
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto rows = read_rows(path);
  if (!rows.empty() && is_header(rows.front())) rows.erase(rows.begin());
  require(!rows.empty(), "csv: no data rows in " + path.string());
  const auto cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == cols, "csv: ragged row in " + path.string());
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_cell(rows[i][j]);
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace kpl::io
