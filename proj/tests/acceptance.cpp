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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "kernelfuse/bandwidth.hpp"
#include "kernelfuse/connectivity.hpp"
#include "kernelfuse/features.hpp"
#include "kernelfuse/synth.hpp"
#include "kernelfuse/vad.hpp"
#include "oracles.hpp"

using namespace kernelfuse;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

Eigen::MatrixXd formula_points(int n) {
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = std::cos(0.7 * i) + 0.3 * (i / 50);
    x(i, 1) = 0.5 * std::sin(1.3 * i) + ((i * 37) % 11) / 10.0;
  }
  return x;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

bool near(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

std::complex<double> oracle_lambda2(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  const auto values = es.eigenvalues();
  Eigen::Index trivial = 0;
  (values.array() - 1.0).abs().minCoeff(&trivial);
  std::complex<double> best = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i != trivial && std::abs(values(i)) > std::abs(best)) best = values(i);
  }
  return best;
}

Outcome stochasticity() {
  Rng rng(1001);
  double worst = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const auto n = static_cast<Eigen::Index>(8 + rng.below(121));
    const auto dv = pairwise_sq_dists(oracle::random_matrix(rng, n, 1 + static_cast<Eigen::Index>(rng.below(12))));
    const auto dw = pairwise_sq_dists(oracle::random_matrix(rng, n, 1 + static_cast<Eigen::Index>(rng.below(12))));
    const double cv = rng.uniform(0.05, 3.0);
    const double cw = rng.uniform(0.05, 3.0);
    const auto mv = row_normalize(build_affinity(dv, epsilon_single(dv, cv)));
    const auto mw = row_normalize(build_affinity(dw, epsilon_single(dw, cw)));
    for (const auto* m : {&mv, &mw}) worst = std::max(worst, stochastic_defect(m->m));
    worst = std::max(worst, stochastic_defect(fuse_alternating(mv, mw).m));
    worst = std::max(worst, stochastic_defect(fuse_hadamard(mv, mw).m));
    worst = std::max(worst, stochastic_defect(fuse_sum(mv, mw).m));
  }
  return {worst <= 1e-12, "max |row sum - 1| = " + sci(worst)};
}

Outcome connectivity_transfer() {
  Rng rng(1002);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const double density = rng.uniform(0.0, 0.35);
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
      holds = holds &&
              oracle::has_off_diagonal(prod, r) == (oracle::has_off_diagonal(vv, r) || oracle::has_off_diagonal(ww, r));
    }
    const BoolMatrix p = boolean_product(v, w);
    bool same_support = true;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) same_support = same_support && p(i, j) == prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if (!holds || !same_support || !verify_proposition1(v, w)) ++failures;
  }
  return {failures == 0, std::to_string(failures) + " of 1000 cases violated"};
}

Outcome connectivity_model() {
  Outcome out;
  for (double s : {2.0, 3.0, 5.0}) {
    const ConnectivityStats st = single_view_stats({2000, s / 1999.0, 77, 100});
    const bool ok = near(st.isolated_fraction, std::exp(-s), 0.2);
    out.ok = out.ok && ok;
    out.detail += "q(S=" + std::to_string(static_cast<int>(s)) + ")=" + std::to_string(st.isolated_fraction) + " vs " +
                  std::to_string(std::exp(-s)) + "; ";
  }
  for (double s : {2.0, 3.0}) {
    const MultiviewStats st = multiview_degree_stats(2000, s, s, 100, 78);
    const bool ok = near(st.exclusive.mean_degree, s * s, 0.2);
    out.ok = out.ok && ok;
    out.detail += "deg(S=" + std::to_string(static_cast<int>(s)) + ")=" + std::to_string(st.exclusive.mean_degree) +
                  " vs " + std::to_string(s * s) + "; ";
  }
  return out;
}

Outcome bandwidth_selection() {
  Outcome out;
  const auto golden = select_bandwidth_ad(pairwise_sq_dists(formula_points(200)));
  const std::vector<int> ks{20, 10, 15, 12, 11};
  const std::vector<double> deltas{6.66068810828752, 3.418966700427895, 5.047433062175311, 4.071494971953171,
                                   3.745349516785454};
  bool trace_ok = golden.visited.size() == ks.size() && golden.k_ad == 11;
  for (std::size_t i = 0; trace_ok && i < ks.size(); ++i) {
    trace_ok = golden.visited[i].k == ks[i] && near(golden.visited[i].delta, deltas[i], 1e-12);
  }
  out.ok = trace_ok;
  out.detail = std::string("golden trace ") + (trace_ok ? "matches" : "differs");

  SynthConfig sc;
  sc.n_frames = 500;
  sc.seed = 21;
  const Eigen::MatrixXd x = synth_multiview(sc).v;
  const auto d = pairwise_sq_dists(x);
  const BandwidthConfig cfg;
  const auto r = select_bandwidth_ad(d, cfg);

  // Halving 40 candidates takes 5 or 6 probes depending on the branch taken.
  const int lo_iters = static_cast<int>(std::floor(std::log2(cfg.grid_size)));
  const int hi_iters = static_cast<int>(std::ceil(std::log2(cfg.grid_size)));
  const int iters = static_cast<int>(r.visited.size());
  const bool iters_ok = iters >= lo_iters && iters <= hi_iters;

  int k_oracle = 0;
  const auto trace = oracle::bandwidth_trace(d.d2, cfg.c_single, cfg.grid_size, k_oracle);
  bool oracle_ok = k_oracle == r.k_ad && trace.size() == r.visited.size();
  for (std::size_t i = 0; oracle_ok && i < trace.size(); ++i) {
    oracle_ok = trace[i].k == r.visited[i].k && near(r.visited[i].delta, trace[i].delta, 1e-10);
  }

  std::vector<double> grid_delta(static_cast<std::size_t>(cfg.grid_size) + 1, 0.0);
  bool monotone = true;
  for (int k = 1; k <= cfg.grid_size; ++k) {
    grid_delta[static_cast<std::size_t>(k)] = delta_at(d, k * cfg.c_single / cfg.grid_size, r.maxmin);
    if (k > 1) monotone = monotone && grid_delta[static_cast<std::size_t>(k)] >= grid_delta[static_cast<std::size_t>(k - 1)];
  }
  // Bracket: the selected point exceeds the target and its lower neighbour does not.
  const auto k = static_cast<std::size_t>(r.k_ad);
  bool bracket = k == 1 || grid_delta[k - 1] <= r.target;
  bracket = bracket && (k == static_cast<std::size_t>(cfg.grid_size) || grid_delta[k] > r.target);

  out.ok = out.ok && iters_ok && oracle_ok && monotone && bracket;
  out.detail += "; N=500 iterations " + std::to_string(iters) + " (bound " + std::to_string(hi_iters) + ")" +
                ", oracle " + (oracle_ok ? "agrees" : "differs") + ", monotone " + (monotone ? "yes" : "no") +
                ", bracket " + (bracket ? "holds" : "fails") + ", C_ad=" + std::to_string(r.c_ad);
  return out;
}

Outcome fusion_ordering() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    const SynthData data = synth_multiview(sc);
    double auc[3];
    const Fusion kinds[3] = {Fusion::alternating, Fusion::audio_only, Fusion::video_only};
    for (int i = 0; i < 3; ++i) {
      DetectorConfig cfg;
      cfg.fusion = kinds[i];
      auc[i] = roc(detect(data.v, data.w, cfg).score, data.labels).auc;
    }
    const bool win = auc[0] > auc[1] && auc[0] > auc[2];
    wins += win ? 1 : 0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%llu:%.3f/%.3f/%.3f", seed ? " " : "", static_cast<unsigned long long>(seed),
                  auc[0], auc[1], auc[2]);
    detail += buf;
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds (alt/audio/video " + detail + ")"};
}

Outcome c_sweep() {
  const std::vector<double> grid = linear_grid(0.1, 2.0, 20);
  int peak_below_one = 0;
  int near_selection = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    const SynthData data = synth_multiview(sc);
    const SweepResult r = sweep_c(data.v, data.w, data.labels, grid, DetectorConfig{});
    const double c_peak = r.curve[r.argmax].c;
    peak_below_one += c_peak < 1.0 ? 1 : 0;
    near_selection += std::abs(r.algorithm1.c_ad - c_peak) <= 2 * 0.1 + 1e-9 ? 1 : 0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%llu:%.2f/%.3f", seed ? " " : "", static_cast<unsigned long long>(seed), c_peak,
                  r.algorithm1.c_ad);
    detail += buf;
  }
  return {peak_below_one >= 8 && near_selection >= 7,
          "peak<1 in " + std::to_string(peak_below_one) + "/10, C_ad within 2 steps in " +
              std::to_string(near_selection) + "/10 (argmax/C_ad " + detail + ")"};
}

Outcome roc_correctness() {
  Rng rng(1007);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(10 + rng.below(300));
    Eigen::VectorXd s(n);
    Eigen::VectorXi labels(n);
    const double levels = 1.0 + static_cast<double>(rng.below(50));
    for (Eigen::Index i = 0; i < n; ++i) {
      s(i) = std::round(rng.uniform() * levels) / levels;
      labels(i) = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels(0) = 1;
    labels(1) = 0;
    worst = std::max(worst, std::abs(roc(s, labels).auc - oracle::mann_whitney_auc(s, labels)));
  }
  Eigen::VectorXd perfect(6);
  perfect << 0.9, 0.8, 0.7, 0.3, 0.2, 0.1;
  const double auc_perfect = roc(perfect, (Eigen::VectorXi(6) << 1, 1, 1, 0, 0, 0).finished()).auc;
  Eigen::VectorXd noise(10000);
  Eigen::VectorXi labels(10000);
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    noise(i) = rng.uniform();
    labels(i) = rng.bernoulli(0.5) ? 1 : 0;
  }
  const double auc_random = roc(noise, labels).auc;
  const bool ok = worst < 1e-10 && auc_perfect == 1.0 && auc_random >= 0.45 && auc_random <= 0.55;
  return {ok, "max |AUC - MW| = " + sci(worst) + ", perfect " + std::to_string(auc_perfect) + ", random " +
                  std::to_string(auc_random)};
}

Outcome dsp_and_eigen() {
  Rng rng(1008);
  int frame_errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const int len = 1 + static_cast<int>(rng.below(1000));
    const int hop = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(len)));
    const auto n = static_cast<long long>(rng.below(100000));
    if (frame_count(n, FrameSpec{len, hop}) != oracle::enumerate_frames(n, len, hop)) ++frame_errors;
  }

  double snr_error = 0;
  for (double target : {-10.0, -5.0, 0.0, 5.0, 20.0}) {
    SampleBuffer clean, noise;
    clean.samples.resize(24000);
    noise.samples.resize(7000);
    for (Eigen::Index i = 0; i < clean.size(); ++i) clean.samples(i) = 0.3 * rng.normal() * std::sin(i / 900.0);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.samples(i) = 0.05 * rng.normal();
    const MixResult r = mix_interference(clean, noise, SampleBuffer{}, target);
    const Eigen::VectorXd added = r.mixed.samples - clean.samples;
    const double measured = 10.0 * std::log10(clean.samples.squaredNorm() / added.squaredNorm());
    snr_error = std::max(snr_error, std::abs(measured - target));
  }

  double mfcc_drift = 0;
  const MfccExtractor ex(634);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd frame(634);
    for (Eigen::Index j = 0; j < 634; ++j) frame(j) = 0.1 * rng.normal();
    const Eigen::VectorXd base = ex.compute(frame);
    const Eigen::VectorXd scaled = ex.compute(rng.uniform(0.1, 5.0) * frame);
    mfcc_drift = std::max(mfcc_drift, (base.tail(12) - scaled.tail(12)).cwiseAbs().maxCoeff());
  }

  int eigen_failures = 0;
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<Eigen::Index>(4 + rng.below(i % 2 ? 60 : 250));
    Eigen::MatrixXd m;
    if (i % 2) {
      m = oracle::random_stochastic(rng, n);
    } else {
      const auto d = pairwise_sq_dists(oracle::random_matrix(rng, n, 3));
      m = row_normalize(build_affinity(d, epsilon_single(d, rng.uniform(0.5, 3.0)))).m;
    }
    const auto r = leading_nontrivial_eigenvector(MarkovMatrix<double>{m});
    const std::complex<double> lambda = oracle_lambda2(m);
    const double tol = 1e-8 * static_cast<double>(n);
    bool ok;
    if (r.complex_fallback) {
      const Eigen::MatrixXd s = m * m.transpose();
      ok = std::abs(lambda.imag()) > 0 && (s * r.vector - r.eigenvalue * r.vector).norm() < tol;
    } else {
      ok = std::abs(r.eigenvalue - lambda.real()) < 1e-9 && (m * r.vector - r.eigenvalue * r.vector).norm() < tol;
    }
    if (!ok) ++eigen_failures;
  }

  const bool ok = frame_errors == 0 && snr_error <= 0.01 && mfcc_drift <= 1e-9 && eigen_failures == 0;
  return {ok, "framing mismatches " + std::to_string(frame_errors) + ", SNR error " + sci(snr_error) +
                  " dB, MFCC drift " + sci(mfcc_drift) + ", eigen failures " +
                  std::to_string(eigen_failures) + "/100"};
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1 stochasticity", 10, stochasticity},
      {"2 connectivity transfer", 5, connectivity_transfer},
      {"3 random graph model", 60, connectivity_model},
      {"4 bandwidth search", 30, bandwidth_selection},
      {"5 fusion ordering", 120, fusion_ordering},
      {"6 bandwidth sweep", 300, c_sweep},
      {"7 ROC", 60, roc_correctness},
      {"8 DSP and eigen", 60, dsp_and_eigen},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = out.ok && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %s [%.2fs / %.0fs] %s\n", pass ? "PASS" : "FAIL", c.name, seconds, c.limit_seconds,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
