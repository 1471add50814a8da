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

#ifndef KERNELFUSE_MATRIX_IO_HPP
#define KERNELFUSE_MATRIX_IO_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace kernelfuse {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Headered CSV, one matrix row per line. A header line is written from
// `columns`, or as c0,c1,... when `columns` is empty.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& columns = {});

// Raw little-endian layout: "KFM1", u64 rows, u64 cols, float64 row-major.
void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m);

// CSV reader accepts an optional header line (any non-numeric field in the
// first line marks it as a header). Rows must all have the same width.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path);

// Dispatches on the leading magic bytes.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

// Single-column {0,1} CSV with a "label" header.
void write_labels_csv(const std::filesystem::path& path, const Eigen::VectorXi& labels);
Eigen::VectorXi read_labels_csv(const std::filesystem::path& path);

}  // namespace kernelfuse

#endif  // KERNELFUSE_MATRIX_IO_HPP
