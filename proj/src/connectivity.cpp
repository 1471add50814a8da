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

#include "kernelfuse/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "kernelfuse/error.hpp"
#include "kernelfuse/parallel.hpp"
#include "kernelfuse/random.hpp"

namespace kernelfuse {

void Graph::add_edge(int a, int b) {
  if (a == b) return;
  neighbors_[static_cast<std::size_t>(a)].push_back(b);
  neighbors_[static_cast<std::size_t>(b)].push_back(a);
}

void Graph::add_arc(int from, int to) {
  if (from != to) neighbors_[static_cast<std::size_t>(from)].push_back(to);
}

void Graph::finalize() {
  for (auto& list : neighbors_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

BoolMatrix Graph::to_dense(bool with_self_loops) const {
  BoolMatrix out = BoolMatrix::Constant(size(), size(), false);
  for (int a = 0; a < size(); ++a) {
    for (int b : neighbors(a)) out(a, b) = true;
    if (with_self_loops) out(a, a) = true;
  }
  return out;
}

namespace {

void validate(const RandomGraphSpec& spec) {
  if (spec.n < 2) throw DataError("random graph needs n >= 2");
  if (!(spec.p_edge >= 0.0 && spec.p_edge <= 1.0)) throw DataError("edge probability must lie in [0, 1]");
  if (spec.trials < 1) throw DataError("need at least one trial");
}

void accumulate(ConnectivityStats& acc, const Graph& g) {
  for (int a = 0; a < g.size(); ++a) {
    const auto d = static_cast<std::size_t>(g.degree(a));
    if (acc.degree_histogram.size() <= d) acc.degree_histogram.resize(d + 1, 0);
    ++acc.degree_histogram[d];
  }
}

void finish(ConnectivityStats& acc) {
  std::uint64_t nodes = 0;
  double degree_sum = 0.0;
  for (std::size_t d = 0; d < acc.degree_histogram.size(); ++d) {
    nodes += acc.degree_histogram[d];
    degree_sum += static_cast<double>(d) * static_cast<double>(acc.degree_histogram[d]);
  }
  if (nodes == 0) return;
  acc.isolated_fraction =
      acc.degree_histogram.empty() ? 0.0 : static_cast<double>(acc.degree_histogram[0]) / static_cast<double>(nodes);
  acc.mean_degree = degree_sum / static_cast<double>(nodes);
}

}  // namespace

Graph sample_view_graph(const RandomGraphSpec& spec, std::uint64_t trial) {
  validate(spec);
  Graph g(spec.n);
  if (spec.p_edge > 0.0) {
    Rng rng(spec.seed, trial);
    // Walk the pairs (a, b), a < b, in row order, jumping over geometric gaps
    // between successive edges.
    const double log_q = std::log1p(-spec.p_edge);
    long long a = 0;
    long long b = 0;  // position before the first candidate of row a
    const long long n = spec.n;
    while (true) {
      long long skip = 0;
      if (spec.p_edge < 1.0) {
        const double gap = std::floor(std::log1p(-rng.uniform()) / log_q);
        skip = gap > 4e18 ? std::numeric_limits<long long>::max() / 4 : static_cast<long long>(gap);
      }
      b += skip + 1;
      while (a < n - 1 && b >= n) {
        b = b - n + a + 2;
        ++a;
      }
      if (a >= n - 1) break;
      g.add_edge(static_cast<int>(a), static_cast<int>(b));
    }
  }
  g.finalize();
  return g;
}

double isolated_fraction(const Graph& g) {
  if (g.size() == 0) return 0.0;
  int isolated = 0;
  for (int a = 0; a < g.size(); ++a) isolated += g.degree(a) == 0;
  return static_cast<double>(isolated) / g.size();
}

double mean_degree(const Graph& g) {
  if (g.size() == 0) return 0.0;
  double total = 0.0;
  for (int a = 0; a < g.size(); ++a) total += g.degree(a);
  return total / g.size();
}

ConnectivityStats single_view_stats(const RandomGraphSpec& spec) {
  validate(spec);
  std::vector<Graph> graphs(static_cast<std::size_t>(spec.trials));
  parallel_for(graphs.size(), [&](std::size_t t) { graphs[t] = sample_view_graph(spec, t); });
  ConnectivityStats acc;
  for (const auto& g : graphs) accumulate(acc, g);
  finish(acc);
  return acc;
}

Graph multiview_graph(const Graph& v, const Graph& w, bool inclusive) {
  if (v.size() != w.size()) throw DataError("view graphs differ in size");
  const int n = v.size();
  Graph out(n);
  std::vector<int> mark(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    std::vector<int> reached;
    const auto visit = [&](int m) {
      if (m != a && mark[static_cast<std::size_t>(m)] != a) {
        mark[static_cast<std::size_t>(m)] = a;
        reached.push_back(m);
      }
    };
    // Neighbour lists never contain the node itself, so l != a, and m != l.
    for (int l : v.neighbors(a)) {
      for (int m : w.neighbors(l)) visit(m);
    }
    if (inclusive) {
      for (int m : w.neighbors(a)) visit(m);  // l = a
      for (int m : v.neighbors(a)) visit(m);  // l = m
    }
    for (int m : reached) out.add_arc(a, m);
  }
  out.finalize();
  return out;
}

MultiviewStats multiview_degree_stats(int n, double s_v, double s_w, int trials, std::uint64_t seed) {
  if (n < 2) throw DataError("multi-view simulation needs n >= 2");
  if (trials < 1) throw DataError("need at least one trial");
  if (!(s_v >= 0.0) || !(s_w >= 0.0)) throw DataError("mean degrees must be non-negative");
  if (!(s_v * s_w < n - 1)) {
    throw DataError("s_v * s_w = " + std::to_string(s_v * s_w) + " must be below n - 1 = " + std::to_string(n - 1));
  }
  if (s_v > n - 1 || s_w > n - 1) throw DataError("a mean degree exceeds n - 1");
  const RandomGraphSpec spec_v{n, s_v / (n - 1), seed, trials};
  // Second view draws from streams disjoint from the first view's.
  const RandomGraphSpec spec_w{n, s_w / (n - 1), seed, trials};
  const auto stream_w = [&](std::size_t t) { return static_cast<std::uint64_t>(trials) + t; };

  struct Trial {
    Graph v, w, exclusive, inclusive;
  };
  std::vector<Trial> runs(static_cast<std::size_t>(trials));
  parallel_for(runs.size(), [&](std::size_t t) {
    auto& r = runs[t];
    r.v = sample_view_graph(spec_v, t);
    r.w = sample_view_graph(spec_w, stream_w(t));
    r.exclusive = multiview_graph(r.v, r.w, false);
    r.inclusive = multiview_graph(r.v, r.w, true);
  });

  MultiviewStats out;
  out.n = n;
  out.s_v = s_v;
  out.s_w = s_w;
  out.trials = trials;
  out.seed = seed;
  for (const auto& r : runs) {
    accumulate(out.view_v, r.v);
    accumulate(out.view_w, r.w);
    accumulate(out.exclusive, r.exclusive);
    accumulate(out.inclusive, r.inclusive);
  }
  finish(out.view_v);
  finish(out.view_w);
  finish(out.exclusive);
  finish(out.inclusive);
  out.predicted_mean_degree = s_v * s_w;
  out.predicted_isolated_fraction = std::exp(-s_v * s_w);
  return out;
}

BoolMatrix boolean_product(const BoolMatrix& a, const BoolMatrix& b) {
  if (a.cols() != b.rows()) throw DataError("boolean product shape mismatch");
  BoolMatrix out = BoolMatrix::Constant(a.rows(), b.cols(), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index l = 0; l < a.cols(); ++l) {
      if (a(i, l)) out.row(i) = out.row(i).array() || b.row(l).array();
    }
  }
  return out;
}

namespace {

bool has_off_diagonal(const BoolMatrix& m, Eigen::Index row) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j != row && m(row, j)) return true;
  }
  return false;
}

}  // namespace

bool verify_proposition1(const BoolMatrix& mv_support, const BoolMatrix& mw_support) {
  const Eigen::Index n = mv_support.rows();
  if (mv_support.cols() != n || mw_support.rows() != n || mw_support.cols() != n) {
    throw DataError("supports must be square and of equal size");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mv_support(i, i) || !mw_support(i, i)) {
      throw DataError("support is missing the self-loop of node " + std::to_string(i));
    }
  }
  const BoolMatrix product = boolean_product(mv_support, mw_support);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool fused = has_off_diagonal(product, i);
    const bool either = has_off_diagonal(mv_support, i) || has_off_diagonal(mw_support, i);
    if (fused != either) return false;
  }
  return true;
}

void to_json(nlohmann::json& j, const ConnectivityStats& s) {
  j = {{"isolated_fraction", s.isolated_fraction},
       {"mean_degree", s.mean_degree},
       {"degree_histogram", s.degree_histogram}};
}

void to_json(nlohmann::json& j, const MultiviewStats& s) {
  j = {{"n", s.n},
       {"s_v", s.s_v},
       {"s_w", s.s_w},
       {"trials", s.trials},
       {"seed", s.seed},
       {"mean_degree", s.exclusive.mean_degree},
       {"isolated_fraction", s.exclusive.isolated_fraction},
       {"predicted_mean_degree", s.predicted_mean_degree},
       {"predicted_isolated_fraction", s.predicted_isolated_fraction},
       {"inclusive", {{"mean_degree", s.inclusive.mean_degree}, {"isolated_fraction", s.inclusive.isolated_fraction}}},
       {"view_v",
        {{"mean_degree", s.view_v.mean_degree},
         {"isolated_fraction", s.view_v.isolated_fraction},
         {"predicted_isolated_fraction", std::exp(-s.s_v)}}},
       {"view_w",
        {{"mean_degree", s.view_w.mean_degree},
         {"isolated_fraction", s.view_w.isolated_fraction},
         {"predicted_isolated_fraction", std::exp(-s.s_w)}}}};
}

}  // namespace kernelfuse
