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

#include "kernelfuse/synth.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "kernelfuse/error.hpp"
#include "kernelfuse/random.hpp"

namespace kernelfuse {

namespace {

enum Stream : std::uint64_t { kStates, kPhase, kGeometry, kAudioNoise, kVideoNoise, kAudioBursts, kVideoBursts, kSpread };

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DataError(std::string(name) + " must lie in [0, 1]");
}

void require_non_negative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DataError(std::string(name) + " must be finite and non-negative");
}

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd u(dim);
  for (int i = 0; i < dim; ++i) u(i) = rng.normal();
  return u / u.norm();
}

Eigen::VectorXi speech_states(Rng& rng, const SynthConfig& cfg) {
  Eigen::VectorXi s(cfg.n_frames);
  int state = 0;
  int dwell = 0;
  for (int i = 0; i < cfg.n_frames; ++i) {
    if (dwell >= cfg.min_dwell && rng.bernoulli(state == 0 ? cfg.p_on : cfg.p_off)) {
      state = 1 - state;
      dwell = 0;
    }
    s(i) = state;
    ++dwell;
  }
  return s;
}

Eigen::VectorXi bursts(Rng& rng, const SynthConfig& cfg, double rate) {
  Eigen::VectorXi mask = Eigen::VectorXi::Zero(cfg.n_frames);
  const double p_start = rate / (0.5 * (cfg.burst_min + cfg.burst_max));
  int i = 0;
  while (i < cfg.n_frames) {
    if (rng.bernoulli(p_start)) {
      const int len = cfg.burst_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.burst_max - cfg.burst_min + 1)));
      for (int k = i; k < std::min(i + len, cfg.n_frames); ++k) mask(k) = 1;
      i += len;
    } else {
      ++i;
    }
  }
  return mask;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.n_frames < 16) throw DataError("n_frames must be at least 16, got " + std::to_string(cfg.n_frames));
  require_probability(cfg.p_on, "p_on");
  require_probability(cfg.p_off, "p_off");
  require_probability(cfg.audio_interference_rate, "audio_interference_rate");
  require_probability(cfg.video_interference_rate, "video_interference_rate");
  if (cfg.min_dwell < 1) throw DataError("min_dwell must be at least 1");
  if (cfg.audio_dim < 2 || cfg.video_dim < 2) throw DataError("view dimensions must be at least 2");
  if (cfg.burst_min < 1 || cfg.burst_max < cfg.burst_min) throw DataError("burst lengths need 1 <= burst_min <= burst_max");
  require_non_negative(cfg.phase_step, "phase_step");
  require_non_negative(cfg.audio_amplitude, "audio_amplitude");
  require_non_negative(cfg.video_amplitude, "video_amplitude");
  require_non_negative(cfg.audio_separation, "audio_separation");
  require_non_negative(cfg.video_separation, "video_separation");
  require_non_negative(cfg.transient_distance, "transient_distance");
  require_non_negative(cfg.transient_mix, "transient_mix");
  require_non_negative(cfg.transient_spread, "transient_spread");
  require_non_negative(cfg.mouth_distance, "mouth_distance");
  require_non_negative(cfg.noise, "noise");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"n_frames", c.n_frames},
       {"p_on", c.p_on},
       {"p_off", c.p_off},
       {"min_dwell", c.min_dwell},
       {"phase_step", c.phase_step},
       {"audio_dim", c.audio_dim},
       {"video_dim", c.video_dim},
       {"audio_amplitude", c.audio_amplitude},
       {"video_amplitude", c.video_amplitude},
       {"audio_separation", c.audio_separation},
       {"video_separation", c.video_separation},
       {"audio_interference_rate", c.audio_interference_rate},
       {"video_interference_rate", c.video_interference_rate},
       {"burst_min", c.burst_min},
       {"burst_max", c.burst_max},
       {"transient_distance", c.transient_distance},
       {"transient_mix", c.transient_mix},
       {"transient_spread", c.transient_spread},
       {"mouth_distance", c.mouth_distance},
       {"noise", c.noise},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  if (!j.is_object()) throw DataError("synth config must be a JSON object");
  nlohmann::json known;
  to_json(known, c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw DataError("unknown synth config key '" + key + "'");
    if (!value.is_number()) throw DataError("synth config key '" + key + "' must be a number");
  }
  try {
    c.n_frames = j.value("n_frames", c.n_frames);
    c.p_on = j.value("p_on", c.p_on);
    c.p_off = j.value("p_off", c.p_off);
    c.min_dwell = j.value("min_dwell", c.min_dwell);
    c.phase_step = j.value("phase_step", c.phase_step);
    c.audio_dim = j.value("audio_dim", c.audio_dim);
    c.video_dim = j.value("video_dim", c.video_dim);
    c.audio_amplitude = j.value("audio_amplitude", c.audio_amplitude);
    c.video_amplitude = j.value("video_amplitude", c.video_amplitude);
    c.audio_separation = j.value("audio_separation", c.audio_separation);
    c.video_separation = j.value("video_separation", c.video_separation);
    c.audio_interference_rate = j.value("audio_interference_rate", c.audio_interference_rate);
    c.video_interference_rate = j.value("video_interference_rate", c.video_interference_rate);
    c.burst_min = j.value("burst_min", c.burst_min);
    c.burst_max = j.value("burst_max", c.burst_max);
    c.transient_distance = j.value("transient_distance", c.transient_distance);
    c.transient_mix = j.value("transient_mix", c.transient_mix);
    c.transient_spread = j.value("transient_spread", c.transient_spread);
    c.mouth_distance = j.value("mouth_distance", c.mouth_distance);
    c.noise = j.value("noise", c.noise);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid synth config: ") + e.what());
  }
  validate(c);
}

SynthData synth_multiview(const SynthConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_frames;
  Rng states_rng(cfg.seed, kStates);
  Rng phase_rng(cfg.seed, kPhase);
  Rng geometry_rng(cfg.seed, kGeometry);
  Rng audio_noise(cfg.seed, kAudioNoise);
  Rng video_noise(cfg.seed, kVideoNoise);
  Rng audio_bursts(cfg.seed, kAudioBursts);
  Rng video_bursts(cfg.seed, kVideoBursts);
  Rng spread_rng(cfg.seed, kSpread);

  SynthData out;
  out.labels = speech_states(states_rng, cfg);
  Eigen::VectorXd phase(n);
  double theta = 0.0;
  for (int i = 0; i < n; ++i) {
    theta += phase_rng.normal(0.0, cfg.phase_step);
    phase(i) = theta;
  }

  Eigen::MatrixXd audio_embed(cfg.audio_dim, 2);
  for (Eigen::Index k = 0; k < audio_embed.size(); ++k) audio_embed(k) = cfg.audio_amplitude * geometry_rng.normal();
  Eigen::MatrixXd video_embed(cfg.video_dim, 2);
  for (Eigen::Index k = 0; k < video_embed.size(); ++k) video_embed(k) = cfg.video_amplitude * geometry_rng.normal();
  const Eigen::VectorXd audio_speech = cfg.audio_separation * random_unit(geometry_rng, cfg.audio_dim);
  const Eigen::VectorXd transient = audio_speech + cfg.transient_distance * random_unit(geometry_rng, cfg.audio_dim);
  const Eigen::VectorXd video_speech = cfg.video_separation * random_unit(geometry_rng, cfg.video_dim);
  const Eigen::VectorXd mouth = video_speech + cfg.mouth_distance * random_unit(geometry_rng, cfg.video_dim);

  out.audio_bursts = bursts(audio_bursts, cfg, cfg.audio_interference_rate);
  out.video_bursts = bursts(video_bursts, cfg, cfg.video_interference_rate);

  out.v.resize(n, cfg.audio_dim);
  out.w.resize(n, cfg.video_dim);
  for (Eigen::Index k = 0; k < out.v.size(); ++k) out.v(k) = cfg.noise * audio_noise.normal();
  for (Eigen::Index k = 0; k < out.w.size(); ++k) out.w(k) = cfg.noise * video_noise.normal();

  for (int i = 0; i < n; ++i) {
    const bool speech = out.labels(i) == 1;
    if (speech) {
      const Eigen::Vector2d circle(std::cos(phase(i)), std::sin(phase(i)));
      out.v.row(i) += (audio_speech + audio_embed * circle).transpose();
      out.w.row(i) += (video_speech + video_embed * circle).transpose();
    }
    if (out.audio_bursts(i)) {
      const Eigen::VectorXd offset = speech ? Eigen::VectorXd(cfg.transient_mix * (transient - audio_speech)) : transient;
      out.v.row(i) += offset.transpose();
      for (int d = 0; d < cfg.audio_dim; ++d) out.v(i, d) += cfg.transient_spread * cfg.noise * spread_rng.normal();
    }
    if (out.video_bursts(i) && !speech) out.w.row(i) += mouth.transpose();
  }
  return out;
}

}  // namespace kernelfuse
