/* Copyright 2026 The kernelfuse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "kernelfuse/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kernelfuse/error.hpp"

namespace kernelfuse {

namespace {

constexpr std::array<char, 4> kMagic{'K', 'F', 'M', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& value) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw DataError("cannot format floating-point value");
  return std::string(buf.data(), ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& columns) {
  if (!columns.empty() && static_cast<Eigen::Index>(columns.size()) != m.cols()) {
    throw DataError("CSV header has " + std::to_string(columns.size()) + " names for " +
                    std::to_string(m.cols()) + " columns");
  }
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out << ',';
    if (columns.empty()) {
      out << 'c' << j;
    } else {
      out << columns[static_cast<std::size_t>(j)];
    }
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = m;
  out.write(reinterpret_cast<const char*>(row_major.data()),
            static_cast<std::streamsize>(row_major.size() * sizeof(double)));
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size() && numeric; ++j) numeric = parse_double(fields[j], row[j]);
    if (!numeric) {
      if (rows == 0 && width == 0 && line_no == 1) continue;  // header
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw DataError("'" + path.string() + "' contains no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * width + j];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::array<char, 4> magic{};
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || magic != kMagic) throw DataError("'" + path.string() + "' is not a KFM1 matrix file");
  const std::uint64_t count = rows * cols;
  if (cols != 0 && count / cols != rows) throw DataError("'" + path.string() + "' has an impossible shape");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(
      static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(row_major.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw DataError("'" + path.string() + "' is truncated");
  return row_major;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::array<char, 4> magic{};
  {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    in.read(magic.data(), magic.size());
    if (in && magic == kMagic) return read_matrix_binary(path);
  }
  return read_matrix_csv(path);
}

void write_labels_csv(const std::filesystem::path& path, const Eigen::VectorXi& labels) {
  auto out = open_out(path);
  out << "label\n";
  for (Eigen::Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Eigen::VectorXi read_labels_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.cols() != 1) {
    throw DataError("label file '" + path.string() + "' must have one column, found " + std::to_string(m.cols()));
  }
  Eigen::VectorXi labels(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, 0) != 0.0 && m(i, 0) != 1.0) {
      throw DataError("label file '" + path.string() + "' row " + std::to_string(i) + " is not 0 or 1");
    }
    labels(i) = static_cast<int>(m(i, 0));
  }
  return labels;
}

}  // namespace kernelfuse
