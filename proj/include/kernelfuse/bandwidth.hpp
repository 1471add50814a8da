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

#ifndef KERNELFUSE_BANDWIDTH_HPP
#define KERNELFUSE_BANDWIDTH_HPP

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kernelfuse/kernel_graph.hpp"

namespace kernelfuse {

struct BandwidthConfig {
  // Single-view multiplier C; 2 to 3 keeps a single-view graph connected.
  double c_single = 2.0;
  // Number of grid points |C|; the grid is C_k = (k / grid_size) * c_single.
  int grid_size = 40;
  // The multi-view target is delta_hat raised to this power.
  static constexpr double target_exponent = 0.5;
};

/// One evaluated grid point of the binary search (k is 1-based).
template <typename Scalar>
struct BandwidthStep {
  int k = 0;
  Scalar c{0};
  Scalar delta{0};
};

template <typename Scalar>
struct BandwidthReport {
  Scalar maxmin{0};
  Scalar c_single{0};
  Scalar epsilon_single{0};
  Scalar delta_hat{0};
  Scalar target{0};
  int grid_size = 0;
  int k_ad = 0;
  Scalar c_ad{0};
  Scalar epsilon_ad{0};
  Scalar delta_ad{0};
  std::vector<BandwidthStep<Scalar>> visited;
  // Set when delta_hat < 1: the single-view graph is already sparser than
  // the target, so every candidate falls below it and the search ends at c_single.
  bool sparse_warning = false;
};

/// max over m of min over n != m of d2(n, m): the squared distance from the
/// most isolated point to its nearest neighbour.
template <typename Scalar>
Scalar maxmin_sq_dist(const DistanceMatrix<Scalar>& d) {
  const Eigen::Index n = d.size();
  if (n < 2) throw DataError("max-min distance needs at least 2 points, got " + std::to_string(n));
  Scalar worst = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    Scalar nearest = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != m) nearest = std::min(nearest, d.d2(i, m));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

/// epsilon = c * maxmin_sq_dist(d).
template <typename Scalar>
Scalar epsilon_single(const DistanceMatrix<Scalar>& d, Scalar c) {
  if (!(c > 0)) throw DataError("bandwidth multiplier must be positive, got " + std::to_string(c));
  const Scalar mm = maxmin_sq_dist(d);
  if (!(mm > 0)) {
    throw DataError("max-min squared distance is zero: some point has an exact duplicate and no "
                    "bandwidth can be derived; remove duplicate frames");
  }
  return c * mm;
}

/// Mean off-diagonal kernel value, the estimated edge probability.
template <typename Scalar>
Scalar estimate_p(const AffinityKernel<Scalar>& k) {
  const Eigen::Index n = k.size();
  if (n < 2) throw DataError("edge probability needs at least 2 points");
  const Scalar off_diagonal = k.k.sum() - k.k.trace();
  return off_diagonal / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
}

/// Estimated mean degree, (N - 1) * p_hat.
template <typename Scalar>
Scalar estimate_delta(const AffinityKernel<Scalar>& k) {
  return static_cast<Scalar>(k.size() - 1) * estimate_p(k);
}

/// Mean degree of the graph built with bandwidth c * maxmin.
template <typename Scalar>
Scalar delta_at(const DistanceMatrix<Scalar>& d, Scalar c, Scalar maxmin) {
  return estimate_delta(build_affinity(d, c * maxmin));
}

/// Bandwidth for alternating-diffusion fusion.
///
/// Estimates the single-view mean degree delta_hat at c_single, then binary
/// searches the grid C_k = (k / |C|) c_single for the point whose mean degree
/// reaches sqrt(delta_hat). Each step evaluates the element at position
/// |C|/2 (integer division) of the surviving set, keeps the lower half
/// (including it) when its degree exceeds the target and the upper half
/// otherwise, until a single element remains.
template <typename Scalar>
BandwidthReport<Scalar> select_bandwidth_ad(const DistanceMatrix<Scalar>& d, const BandwidthConfig& cfg = {}) {
  if (!(cfg.c_single > 0)) throw DataError("c_single must be positive");
  if (cfg.grid_size < 2) throw DataError("bandwidth grid needs at least 2 points");
  BandwidthReport<Scalar> r;
  r.c_single = static_cast<Scalar>(cfg.c_single);
  r.grid_size = cfg.grid_size;
  r.epsilon_single = epsilon_single(d, r.c_single);
  r.maxmin = maxmin_sq_dist(d);
  r.delta_hat = estimate_delta(build_affinity(d, r.epsilon_single));
  r.target = std::pow(r.delta_hat, static_cast<Scalar>(BandwidthConfig::target_exponent));
  r.sparse_warning = r.delta_hat < 1;

  const auto grid_c = [&](int k) { return static_cast<Scalar>(k) / static_cast<Scalar>(cfg.grid_size) * r.c_single; };
  int lo = 1;
  int hi = cfg.grid_size;
  while (hi - lo + 1 != 1) {
    const int half = (hi - lo + 1) / 2;
    const int k = lo + half - 1;
    const Scalar c = grid_c(k);
    const Scalar delta = delta_at(d, c, r.maxmin);
    r.visited.push_back({k, c, delta});
    if (delta > r.target) {
      hi = k;
    } else {
      lo = k + 1;
    }
  }
  r.k_ad = lo;
  r.c_ad = grid_c(lo);
  r.epsilon_ad = r.c_ad * r.maxmin;
  r.delta_ad = delta_at(d, r.c_ad, r.maxmin);
  return r;
}

void to_json(nlohmann::json& j, const BandwidthReport<double>& r);

}  // namespace kernelfuse

#endif  // KERNELFUSE_BANDWIDTH_HPP
