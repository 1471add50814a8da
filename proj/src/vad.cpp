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

#include "kernelfuse/vad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "kernelfuse/error.hpp"
#include "kernelfuse/parallel.hpp"

namespace kernelfuse {

const char* to_string(Fusion fusion) {
  switch (fusion) {
    case Fusion::alternating: return "alternating";
    case Fusion::hadamard: return "hadamard";
    case Fusion::sum: return "sum";
    case Fusion::audio_only: return "audio_only";
    case Fusion::video_only: return "video_only";
  }
  return "unknown";
}

const char* to_string(BandwidthMode mode) {
  return mode == BandwidthMode::algorithm1 ? "algorithm1" : "single_view_rule";
}

Fusion fusion_from_string(const std::string& name) {
  for (Fusion f : {Fusion::alternating, Fusion::hadamard, Fusion::sum, Fusion::audio_only, Fusion::video_only}) {
    if (name == to_string(f)) return f;
  }
  throw UsageError("unknown fusion '" + name + "' (expected alternating, hadamard, sum, audio_only or video_only)");
}

BandwidthMode bandwidth_mode_from_string(const std::string& name) {
  if (name == "single_view_rule") return BandwidthMode::single_view_rule;
  if (name == "algorithm1") return BandwidthMode::algorithm1;
  throw UsageError("unknown bandwidth mode '" + name + "' (expected single_view_rule or algorithm1)");
}

void validate(const DetectorConfig& cfg) {
  if (!(cfg.c_single > 0) || !std::isfinite(cfg.c_single)) {
    throw DataError("c_single must be positive, got " + std::to_string(cfg.c_single));
  }
  if (cfg.grid_size < 2) throw DataError("bandwidth grid needs at least 2 points");
}

void to_json(nlohmann::json& j, const DetectorConfig& cfg) {
  nlohmann::json views = nlohmann::json::array();
  if (cfg.apply_algorithm1_to.audio) views.push_back("audio");
  if (cfg.apply_algorithm1_to.video) views.push_back("video");
  j = {{"fusion", to_string(cfg.fusion)},
       {"bandwidth_mode", to_string(cfg.bandwidth_mode)},
       {"apply_algorithm1_to", views},
       {"eigen_method", to_string(cfg.eigen_method)},
       {"c_single", cfg.c_single},
       {"grid_size", cfg.grid_size}};
}

ActivityScore orient_sign(const Eigen::VectorXd& nu1, const Eigen::VectorXd& audio_energy) {
  if (nu1.size() != audio_energy.size()) {
    throw DataError("score has " + std::to_string(nu1.size()) + " frames but the energy has " +
                    std::to_string(audio_energy.size()));
  }
  if (nu1.size() == 0 || !nu1.allFinite()) throw DataError("score is empty or non-finite");
  const Eigen::ArrayXd centered = nu1.array() - nu1.mean();
  if (!(centered.abs().maxCoeff() > 0)) throw DataError("score is constant; the embedding is degenerate");
  const double covariance = (centered * (audio_energy.array() - audio_energy.mean())).sum();
  ActivityScore out;
  out.nu1 = nu1.normalized();
  if (covariance < 0) out.nu1 = -out.nu1;
  out.orientation_source = "correlation with audio frame energy";
  return out;
}

Eigen::VectorXd energy_proxy(const Eigen::MatrixXd& v) { return v.rowwise().squaredNorm(); }

namespace {

struct ViewBandwidth {
  double epsilon = 0.0;
  std::optional<BandwidthReport<double>> report;
};

ViewBandwidth view_bandwidth(const DistanceMatrix<double>& d, const DetectorConfig& cfg, bool use_algorithm1) {
  ViewBandwidth out;
  if (use_algorithm1) {
    out.report = select_bandwidth_ad(d, BandwidthConfig{cfg.c_single, cfg.grid_size});
    out.epsilon = out.report->epsilon_ad;
  } else {
    out.epsilon = epsilon_single(d, cfg.c_single);
  }
  return out;
}

MarkovMatrix<double> markov(const DistanceMatrix<double>& d, double epsilon) {
  return row_normalize(build_affinity(d, epsilon));
}

}  // namespace

Detection detect(const DistanceMatrix<double>& dv, const DistanceMatrix<double>& dw, const DetectorConfig& cfg,
                 const Eigen::VectorXd& audio_energy, std::optional<double> audio_c) {
  validate(cfg);
  const bool need_v = cfg.fusion != Fusion::video_only;
  const bool need_w = cfg.fusion != Fusion::audio_only;
  const bool multi = !is_single_view(cfg.fusion) && cfg.bandwidth_mode == BandwidthMode::algorithm1;
  if (need_v && need_w && dv.size() != dw.size()) {
    throw DataError("audio view has " + std::to_string(dv.size()) + " frames but video view has " +
                    std::to_string(dw.size()));
  }

  Detection out;
  MarkovMatrix<double> mv;
  MarkovMatrix<double> mw;
  if (need_v) {
    if (audio_c) {
      out.epsilon_v = epsilon_single(dv, *audio_c);
    } else {
      auto bw = view_bandwidth(dv, cfg, multi && cfg.apply_algorithm1_to.audio);
      out.epsilon_v = bw.epsilon;
      out.bandwidth_v = std::move(bw.report);
    }
    mv = markov(dv, out.epsilon_v);
  }
  if (need_w) {
    auto bw = view_bandwidth(dw, cfg, multi && cfg.apply_algorithm1_to.video);
    out.epsilon_w = bw.epsilon;
    out.bandwidth_w = std::move(bw.report);
    mw = markov(dw, out.epsilon_w);
  }

  MarkovMatrix<double> fused;
  switch (cfg.fusion) {
    case Fusion::alternating: fused = fuse_alternating(mv, mw); break;
    case Fusion::hadamard: fused = fuse_hadamard(mv, mw); break;
    case Fusion::sum: fused = fuse_sum(mv, mw); break;
    case Fusion::audio_only: fused = std::move(mv); break;
    case Fusion::video_only: fused = std::move(mw); break;
  }

  const auto spectral = leading_nontrivial_eigenvector(fused, cfg.eigen_method);
  out.eigenvalue = spectral.eigenvalue;
  out.residual = spectral.residual;
  out.complex_fallback = spectral.complex_fallback;
  out.score = orient_sign(spectral.vector, audio_energy);
  return out;
}

Detection detect(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, const DetectorConfig& cfg,
                 const std::optional<Eigen::VectorXd>& audio_energy) {
  if (v.rows() != w.rows()) {
    throw DataError("audio features have " + std::to_string(v.rows()) + " frames but video features have " +
                    std::to_string(w.rows()));
  }
  const DistanceMatrix<double> dv =
      cfg.fusion == Fusion::video_only ? DistanceMatrix<double>{} : pairwise_sq_dists(v);
  const DistanceMatrix<double> dw =
      cfg.fusion == Fusion::audio_only ? DistanceMatrix<double>{} : pairwise_sq_dists(w);
  return detect(dv, dw, cfg, audio_energy ? *audio_energy : energy_proxy(v));
}

Eigen::VectorXi threshold_indicator(const Eigen::VectorXd& score, double tau) {
  return (score.array() > tau).cast<int>().matrix();
}

Eigen::VectorXi threshold_indicator(const ActivityScore& score, double tau) {
  return threshold_indicator(score.nu1, tau);
}

RocCurve roc(const Eigen::VectorXd& score, const Eigen::VectorXi& labels) {
  if (score.size() != labels.size()) {
    throw DataError("score has " + std::to_string(score.size()) + " frames but labels have " +
                    std::to_string(labels.size()));
  }
  if (!score.allFinite()) throw DataError("score contains non-finite values");
  if (((labels.array() != 0) && (labels.array() != 1)).any()) throw DataError("labels must be 0 or 1");
  const double positives = labels.sum();
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw DataError("labels contain a single class; ROC is undefined");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(score.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return score(a) > score(b); });

  constexpr double inf = std::numeric_limits<double>::infinity();
  RocCurve out;
  out.thresholds.push_back(inf);
  out.points.emplace_back(0.0, 0.0);
  // At tau equal to a score value the frames carrying it are still excluded,
  // so each threshold reports the counts accumulated before its group.
  double tp = 0;
  double fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = score(order[i]);
    out.thresholds.push_back(value);
    out.points.emplace_back(fp / negatives, tp / positives);
    for (; i < order.size() && score(order[i]) == value; ++i) {
      if (labels(order[i]) == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
  }
  out.thresholds.push_back(-inf);
  out.points.emplace_back(1.0, 1.0);

  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& [x0, y0] = out.points[i - 1];
    const auto& [x1, y1] = out.points[i];
    out.auc += (x1 - x0) * (y0 + y1) / 2;
  }
  return out;
}

std::vector<double> linear_grid(double c_min, double c_max, int steps) {
  if (steps < 1) throw UsageError("grid needs at least one step");
  if (!(c_min > 0) || !std::isfinite(c_max) || c_max < c_min) throw UsageError("grid needs 0 < c_min <= c_max");
  if (steps == 1) return {c_min};
  std::vector<double> grid(static_cast<std::size_t>(steps));
  const double span = steps - 1;
  // Rounded to 1e-12 so decimal grids such as 0.1, 0.2, ... come out exact.
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] = std::round((c_min + (c_max - c_min) * i / span) * 1e12) / 1e12;
  }
  return grid;
}

SweepResult sweep_c(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, const Eigen::VectorXi& labels,
                    const std::vector<double>& c_grid, const DetectorConfig& cfg,
                    const std::optional<Eigen::VectorXd>& audio_energy) {
  if (c_grid.empty()) throw UsageError("sweep grid is empty");
  for (double c : c_grid) {
    if (!(c > 0) || !std::isfinite(c)) throw DataError("sweep multipliers must be positive, got " + std::to_string(c));
  }
  if (v.rows() != w.rows()) {
    throw DataError("audio features have " + std::to_string(v.rows()) + " frames but video features have " +
                    std::to_string(w.rows()));
  }
  DetectorConfig fixed = cfg;
  fixed.bandwidth_mode = BandwidthMode::single_view_rule;
  validate(fixed);
  const Eigen::VectorXd energy = audio_energy ? *audio_energy : energy_proxy(v);
  const DistanceMatrix<double> dv = pairwise_sq_dists(v);
  const DistanceMatrix<double> dw =
      fixed.fusion == Fusion::audio_only ? DistanceMatrix<double>{} : pairwise_sq_dists(w);

  SweepResult out;
  out.algorithm1 = select_bandwidth_ad(dv, BandwidthConfig{fixed.c_single, fixed.grid_size});
  std::vector<double> grid = c_grid;
  grid.push_back(out.algorithm1.c_ad);
  std::vector<double> aucs(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    aucs[i] = roc(detect(dv, dw, fixed, energy, grid[i]).score, labels).auc;
  });
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    out.curve.push_back({c_grid[i], aucs[i]});
    if (aucs[i] > aucs[out.argmax]) out.argmax = i;
  }
  out.algorithm1_auc = aucs.back();
  return out;
}

}  // namespace kernelfuse
