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

#ifndef KERNELFUSE_CONNECTIVITY_HPP
#define KERNELFUSE_CONNECTIVITY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kernelfuse {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct RandomGraphSpec {
  int n = 2;
  double p_edge = 0.0;
  std::uint64_t seed = 0;
  int trials = 1;
};

/// Graph without self-loops, stored as sorted out-neighbour lists. Sampled
/// view graphs are undirected (add_edge); multi-view graphs are directed (add_arc).
class Graph {
 public:
  explicit Graph(int n = 0) : neighbors_(static_cast<std::size_t>(n)) {}

  int size() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int node) const { return neighbors_[static_cast<std::size_t>(node)]; }
  int degree(int node) const { return static_cast<int>(neighbors(node).size()); }

  void add_edge(int a, int b);
  void add_arc(int from, int to);
  // Sorts and deduplicates neighbour lists; call after the last add_edge.
  void finalize();

  BoolMatrix to_dense(bool with_self_loops = false) const;

 private:
  std::vector<std::vector<int>> neighbors_;
};

struct ConnectivityStats {
  double isolated_fraction = 0.0;
  double mean_degree = 0.0;
  // degree_histogram[d] counts nodes of degree d, pooled over trials.
  std::vector<std::uint64_t> degree_histogram;
};

/// Every unordered pair is an edge independently with probability p_edge.
/// `trial` selects an independent random stream derived from spec.seed.
Graph sample_view_graph(const RandomGraphSpec& spec, std::uint64_t trial = 0);

double isolated_fraction(const Graph& g);
double mean_degree(const Graph& g);

/// Pools degree statistics over spec.trials independent graphs.
ConnectivityStats single_view_stats(const RandomGraphSpec& spec);

/// Multi-view graph of a two-step walk: view v then view w.
///
/// With `inclusive`, every node also reaches itself in each view, so m is a
/// neighbour of n when some l in {all nodes} has (n, l) in v and (l, m) in w
/// with self-steps allowed. Otherwise only intermediates l distinct from both
/// n and m count, which is the convention of the binomial degree model.
Graph multiview_graph(const Graph& v, const Graph& w, bool inclusive);

struct MultiviewStats {
  int n = 0;
  double s_v = 0.0;
  double s_w = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  ConnectivityStats exclusive;
  ConnectivityStats inclusive;
  ConnectivityStats view_v;
  ConnectivityStats view_w;
  double predicted_mean_degree = 0.0;        // s_v * s_w
  double predicted_isolated_fraction = 0.0;  // exp(-s_v * s_w)
};

/// Samples view graphs with p = s / (n - 1) per view and pools the
/// multi-view degree statistics. Requires s_v * s_w < n - 1.
MultiviewStats multiview_degree_stats(int n, double s_v, double s_w, int trials, std::uint64_t seed);

/// Support of the product of two non-negative matrices: (a b)(n, m) != 0.
BoolMatrix boolean_product(const BoolMatrix& a, const BoolMatrix& b);

/// Checks the connectivity transfer property for two supports that carry
/// self-loops: for every n, row n of the product has an off-diagonal entry
/// exactly when row n of either input has one. Throws DataError if a
/// diagonal entry is missing.
bool verify_proposition1(const BoolMatrix& mv_support, const BoolMatrix& mw_support);

void to_json(nlohmann::json& j, const ConnectivityStats& s);
void to_json(nlohmann::json& j, const MultiviewStats& s);

}  // namespace kernelfuse

#endif  // KERNELFUSE_CONNECTIVITY_HPP
