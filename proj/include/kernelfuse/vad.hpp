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

#ifndef KERNELFUSE_VAD_HPP
#define KERNELFUSE_VAD_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kernelfuse/bandwidth.hpp"
#include "kernelfuse/kernel_graph.hpp"

namespace kernelfuse {

enum class Fusion { alternating, hadamard, sum, audio_only, video_only };
enum class BandwidthMode { single_view_rule, algorithm1 };

const char* to_string(Fusion fusion);
const char* to_string(BandwidthMode mode);
Fusion fusion_from_string(const std::string& name);
BandwidthMode bandwidth_mode_from_string(const std::string& name);

inline bool is_single_view(Fusion f) { return f == Fusion::audio_only || f == Fusion::video_only; }

/// Views that take their bandwidth from the multi-view selection rule when
/// bandwidth_mode is algorithm1. The others keep epsilon = c_single * maxmin.
struct ViewSet {
  bool audio = true;
  bool video = false;
};

struct DetectorConfig {
  Fusion fusion = Fusion::alternating;
  BandwidthMode bandwidth_mode = BandwidthMode::single_view_rule;
  ViewSet apply_algorithm1_to;
  EigenMethod eigen_method = EigenMethod::direct;
  double c_single = 2.0;
  int grid_size = 40;
};

void validate(const DetectorConfig& cfg);
void to_json(nlohmann::json& j, const DetectorConfig& cfg);

struct ActivityScore {
  Eigen::VectorXd nu1;  // unit norm, larger means more speech-like
  std::string orientation_source;
};

struct Detection {
  ActivityScore score;
  double eigenvalue = 0.0;
  double residual = 0.0;
  bool complex_fallback = false;
  double epsilon_v = 0.0;  // 0 when the view is unused
  double epsilon_w = 0.0;
  std::optional<BandwidthReport<double>> bandwidth_v;
  std::optional<BandwidthReport<double>> bandwidth_w;
};

/// Flips nu1 when it is negatively correlated with the audio frame energy
/// and rescales it to unit norm. Throws DataError if nu1 is constant.
ActivityScore orient_sign(const Eigen::VectorXd& nu1, const Eigen::VectorXd& audio_energy);

/// Squared row norms of the audio features, used for orientation when no
/// frame energy is supplied.
Eigen::VectorXd energy_proxy(const Eigen::MatrixXd& v);

/// Full detector: kernels, bandwidths, fusion, leading nontrivial
/// eigenvector, orientation. `audio_energy` defaults to energy_proxy(v).
Detection detect(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, const DetectorConfig& cfg,
                 const std::optional<Eigen::VectorXd>& audio_energy = std::nullopt);

/// Same pipeline on precomputed distances. `audio_c` overrides the audio
/// bandwidth multiplier, bypassing the configured bandwidth mode for that view.
Detection detect(const DistanceMatrix<double>& dv, const DistanceMatrix<double>& dw, const DetectorConfig& cfg,
                 const Eigen::VectorXd& audio_energy, std::optional<double> audio_c = std::nullopt);

/// 1 where nu1(n) > tau.
Eigen::VectorXi threshold_indicator(const ActivityScore& score, double tau);
Eigen::VectorXi threshold_indicator(const Eigen::VectorXd& score, double tau);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (pfa, pd), pfa non-decreasing
  std::vector<double> thresholds;                 // tau for each point, +inf down to -inf
  double auc = 0.0;
};

/// Empirical ROC over every distinct score plus +-inf, AUC by trapezoid.
/// Labels must be 0/1 with both classes present.
RocCurve roc(const Eigen::VectorXd& score, const Eigen::VectorXi& labels);
inline RocCurve roc(const ActivityScore& score, const Eigen::VectorXi& labels) { return roc(score.nu1, labels); }

struct SweepPoint {
  double c = 0.0;
  double auc = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> curve;
  BandwidthReport<double> algorithm1;  // selection on the audio view
  double algorithm1_auc = 0.0;
  std::size_t argmax = 0;  // first index of the largest AUC
};

/// AUC as a function of the audio multiplier c (epsilon_v = c * maxmin) with
/// the video view held at cfg.c_single. Grid points run in parallel.
SweepResult sweep_c(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, const Eigen::VectorXi& labels,
                    const std::vector<double>& c_grid, const DetectorConfig& cfg,
                    const std::optional<Eigen::VectorXd>& audio_energy = std::nullopt);

/// {c_min, c_min + step, ..., c_max} with `steps` points; steps == 1 yields {c_min}.
std::vector<double> linear_grid(double c_min, double c_max, int steps);

}  // namespace kernelfuse

#endif  // KERNELFUSE_VAD_HPP
