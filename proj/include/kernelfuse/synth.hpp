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

#ifndef KERNELFUSE_SYNTH_HPP
#define KERNELFUSE_SYNTH_HPP

#include <Eigen/Dense>

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

namespace kernelfuse {

/// Parameters of the synthetic two-view generator.
///
/// A two-state speech process (a Markov chain with a minimum dwell time)
/// switches a shared latent phase on and off. While speech is active the
/// phase is embedded into both views around a per-view speech centre; during
/// silence each view sits at the origin. On top of that, view v (audio)
/// receives transient bursts and view w (video) receives mouth-movement
/// bursts, each confined to its own view. Every component draws from its own
/// random stream, so switching one view's interference off leaves the other
/// view bit-identical.
struct SynthConfig {
  int n_frames = 1000;
  double p_on = 0.06;   // silence -> speech switching probability per frame
  double p_off = 0.06;  // speech -> silence
  int min_dwell = 3;
  double phase_step = 0.3;
  int audio_dim = 6;
  int video_dim = 4;
  double audio_amplitude = 0.5;
  double video_amplitude = 0.3;
  double audio_separation = 2.0;
  double video_separation = 2.0;
  // Interference rates are the expected fraction of frames inside a burst.
  double audio_interference_rate = 0.2;
  double video_interference_rate = 0.2;
  int burst_min = 2;
  int burst_max = 6;
  double transient_distance = 0.6;
  double transient_mix = 0.5;
  double transient_spread = 0.3;
  double mouth_distance = 0.3;
  double noise = 0.25;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

void to_json(nlohmann::json& j, const SynthConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, SynthConfig& cfg);

struct SynthData {
  Eigen::MatrixXd v;
  Eigen::MatrixXd w;
  Eigen::VectorXi labels;
  Eigen::VectorXi audio_bursts;
  Eigen::VectorXi video_bursts;
};

SynthData synth_multiview(const SynthConfig& cfg);

}  // namespace kernelfuse

#endif  // KERNELFUSE_SYNTH_HPP
