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

#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernelfuse/connectivity.hpp"
#include "kernelfuse/error.hpp"
#include "oracles.hpp"

using namespace kernelfuse;

TEST_CASE("edge probability extremes") {
  const Graph empty = sample_view_graph({50, 0.0, 1, 1});
  CHECK(isolated_fraction(empty) == 1.0);
  CHECK(mean_degree(empty) == 0.0);
  const Graph full = sample_view_graph({50, 1.0, 1, 1});
  CHECK(isolated_fraction(full) == 0.0);
  CHECK(mean_degree(full) == 49.0);
}

TEST_CASE("sampled graphs are simple and undirected") {
  const Graph g = sample_view_graph({200, 0.05, 3, 1}, 4);
  const BoolMatrix a = g.to_dense();
  CHECK(a == a.transpose());
  for (int i = 0; i < 200; ++i) CHECK_FALSE(a(i, i));
  CHECK(g.to_dense(true).diagonal().all());
}

TEST_CASE("single-view mean degree is binomial") {
  const auto stats = single_view_stats({1000, 3.0 / 999.0, 21, 200});
  CHECK(stats.mean_degree == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("single-view degree histogram fits B(N-1, p)") {
  const int n = 1000;
  const double p = 3.0 / 999.0;
  const int trials = 200;
  const auto stats = single_view_stats({n, p, 22, trials});
  const boost::math::binomial_distribution<double> law(n - 1, p);
  const double total = static_cast<double>(n) * trials;

  // Bins 0..K-1 individually, then one tail bin, with K the first degree whose
  // expected count drops below 5.
  std::vector<double> expected;
  std::vector<double> observed;
  int k = 0;
  while (total * boost::math::pdf(law, k) >= 5.0) {
    expected.push_back(total * boost::math::pdf(law, k));
    observed.push_back(k < static_cast<int>(stats.degree_histogram.size())
                           ? static_cast<double>(stats.degree_histogram[static_cast<std::size_t>(k)])
                           : 0.0);
    ++k;
  }
  double tail_observed = 0;
  for (std::size_t d = static_cast<std::size_t>(k); d < stats.degree_histogram.size(); ++d) {
    tail_observed += static_cast<double>(stats.degree_histogram[d]);
  }
  expected.push_back(total * boost::math::cdf(boost::math::complement(law, k - 1)));
  observed.push_back(tail_observed);

  double chi2 = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) chi2 += std::pow(observed[i] - expected[i], 2) / expected[i];
  const boost::math::chi_squared_distribution<double> reference(static_cast<double>(expected.size() - 1));
  CHECK(chi2 < boost::math::quantile(reference, 0.999));
}

TEST_CASE("isolated fraction follows exp(-S)") {
  for (double s : {2.0, 3.0, 5.0}) {
    const auto stats = single_view_stats({2000, s / 1999.0, 30 + static_cast<std::uint64_t>(s), 100});
    CHECK(stats.isolated_fraction == doctest::Approx(std::exp(-s)).epsilon(0.2));
  }
}

TEST_CASE("multi-view mean degree follows S_v S_w") {
  const auto stats = multiview_degree_stats(2000, 3.0, 3.0, 100, 40);
  CHECK(stats.exclusive.mean_degree == doctest::Approx(9.0).epsilon(0.2));
  CHECK(stats.predicted_mean_degree == 9.0);
  // Frames without a neighbour in the first view cannot reach anyone in two steps.
  CHECK(stats.exclusive.isolated_fraction > 0.9 * std::exp(-3.0));
  CHECK(stats.exclusive.isolated_fraction < 0.1);
  // With self-steps every view neighbour is also a multi-view neighbour.
  CHECK(stats.inclusive.mean_degree > stats.exclusive.mean_degree);
}

TEST_CASE("an empty first view leaves the second view's support") {
  const auto stats = multiview_degree_stats(500, 0.0, 3.0, 5, 41);
  CHECK(stats.exclusive.mean_degree == 0.0);
  CHECK(stats.inclusive.mean_degree == stats.view_w.mean_degree);
  CHECK(stats.inclusive.isolated_fraction == stats.view_w.isolated_fraction);
}

TEST_CASE("multi-view graph by definition on a small example") {
  Graph v(4);
  v.add_edge(0, 1);
  v.finalize();
  Graph w(4);
  w.add_edge(1, 2);
  w.finalize();
  const Graph ex = multiview_graph(v, w, false);
  CHECK(ex.neighbors(0) == std::vector<int>{2});
  CHECK(ex.degree(1) == 0);
  CHECK(ex.degree(3) == 0);
  const Graph in = multiview_graph(v, w, true);
  CHECK(in.neighbors(0) == std::vector<int>{1, 2});
  CHECK(in.neighbors(1) == std::vector<int>{0, 2});
  CHECK(in.neighbors(2) == std::vector<int>{1});
}

TEST_CASE("simulations are reproducible and independent of thread count") {
  const auto a = multiview_degree_stats(300, 2.0, 2.0, 8, 7);
  const auto b = multiview_degree_stats(300, 2.0, 2.0, 8, 7);
  CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
  const auto c = multiview_degree_stats(300, 2.0, 2.0, 8, 8);
  CHECK(nlohmann::json(a).dump() != nlohmann::json(c).dump());
}

TEST_CASE("precondition S_v S_w < N - 1") {
  CHECK_THROWS_AS(multiview_degree_stats(10, 3.0, 3.0, 1, 0), DataError);
  CHECK_THROWS_AS(multiview_degree_stats(10, -1.0, 1.0, 1, 0), DataError);
}

TEST_CASE("connectivity transfer on hand-made supports") {
  BoolMatrix v = BoolMatrix::Identity(3, 3);
  BoolMatrix w = BoolMatrix::Identity(3, 3);
  v(0, 1) = v(1, 0) = true;
  CHECK(verify_proposition1(v, w));
  // Node 2 is isolated in both views and stays isolated in the product.
  const BoolMatrix p = boolean_product(v, w);
  CHECK(p.row(2).count() == 1);
  CHECK(p(2, 2));
  BoolMatrix bad = v;
  bad(1, 1) = false;
  CHECK_THROWS_AS(verify_proposition1(bad, w), DataError);
}

TEST_CASE("connectivity transfer on random sparse supports against the boolean-product oracle") {
  Rng rng(50);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const double density = rng.uniform(0.0, 0.3);
    BoolMatrix v = BoolMatrix::Identity(n, n);
    BoolMatrix w = BoolMatrix::Identity(n, n);
    std::vector<std::vector<bool>> vv(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
    auto ww = vv;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) {
          v(i, j) = rng.bernoulli(density);
          w(i, j) = rng.bernoulli(density);
        }
        vv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v(i, j);
        ww[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = w(i, j);
      }
    }
    const auto prod = oracle::bool_product(vv, ww);
    bool holds = true;
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
      holds = holds && (oracle::has_off_diagonal(prod, r) ==
                        (oracle::has_off_diagonal(vv, r) || oracle::has_off_diagonal(ww, r)));
    }
    CHECK(holds);
    CHECK(verify_proposition1(v, w));
    const BoolMatrix p = boolean_product(v, w);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) CHECK(p(i, j) == prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
}

TEST_CASE("statistics serialise to JSON") {
  const nlohmann::json j = multiview_degree_stats(200, 2.0, 1.0, 2, 3);
  for (const char* key : {"n", "s_v", "s_w", "trials", "mean_degree", "isolated_fraction", "predicted_isolated_fraction",
                          "predicted_mean_degree"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["view_v"]["predicted_isolated_fraction"].get<double>() == doctest::Approx(std::exp(-2.0)));
}
