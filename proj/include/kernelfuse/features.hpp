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

#ifndef KERNELFUSE_FEATURES_HPP
#define KERNELFUSE_FEATURES_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <vector>

#include "kernelfuse/wav.hpp"

namespace kernelfuse {

/// 634-sample frames with 50% overlap align 8 kHz audio with 25 fps video.
struct FrameSpec {
  int frame_len = 634;
  int hop = 317;
};

void validate(const FrameSpec& spec);

/// floor((n_samples - frame_len) / hop) + 1; zero when the signal is shorter than one frame.
Eigen::Index frame_count(Eigen::Index n_samples, const FrameSpec& spec);

/// Row i holds samples [i * hop, i * hop + frame_len); a trailing partial frame is dropped.
Eigen::MatrixXd frame_signal(const SampleBuffer& buf, const FrameSpec& spec = {});

/// Sum of squared samples per frame.
Eigen::VectorXd frame_energy(const SampleBuffer& buf, const FrameSpec& spec = {});

struct MfccConfig {
  int fft_size = 1024;
  int n_mel_filters = 26;
  int n_coeffs = 13;
  double sample_rate = kDefaultSampleRate;
  double mel_low = 0.0;
  double mel_high = 4000.0;
  double log_floor = 1e-10;
};

void validate(const MfccConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// MFCC front end: Hamming window, zero padding to fft_size, power spectrum,
/// triangular mel filterbank, log with a floor, orthonormal DCT-II. The
/// first n_coeffs cepstra are kept, c0 included.
///
/// Window, filterbank and DCT tables are built once; compute() is const and
/// may be called concurrently.
class MfccExtractor {
 public:
  MfccExtractor(int frame_len, const MfccConfig& cfg = {});

  const MfccConfig& config() const { return cfg_; }
  int frame_len() const { return frame_len_; }

  /// Centre frequency of each triangular filter, in Hz.
  const Eigen::VectorXd& filter_centers_hz() const { return centers_hz_; }
  /// n_mel_filters x (fft_size/2 + 1) triangular weights.
  const Eigen::MatrixXd& filterbank() const { return filterbank_; }

  Eigen::VectorXd power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame) const;
  /// Filterbank energies before the log.
  Eigen::VectorXd mel_energies(const Eigen::Ref<const Eigen::VectorXd>& frame) const;
  Eigen::VectorXd compute(const Eigen::Ref<const Eigen::VectorXd>& frame) const;

  /// One row of coefficients per row of `frames`.
  Eigen::MatrixXd compute_frames(const Eigen::MatrixXd& frames) const;

 private:
  int frame_len_;
  MfccConfig cfg_;
  Eigen::VectorXd window_;
  Eigen::VectorXd centers_hz_;
  Eigen::MatrixXd filterbank_;
  Eigen::MatrixXd dct_;
};

/// Convenience wrapper building a one-off extractor for the frame's length.
Eigen::VectorXd mfcc(const Eigen::Ref<const Eigen::VectorXd>& frame, const MfccConfig& cfg = {});

/// Row n becomes [f(n-1), f(n), f(n+1)]; the first and last frames reuse
/// themselves in place of the missing neighbour, so N is preserved.
Eigen::MatrixXd context_concat(const Eigen::MatrixXd& per_frame);

/// Per-frame motion vectors from CSV (optional header), one row per video
/// frame. Absolute values are taken and context_concat applied. When
/// `expected_frames` is set, a different row count is rejected.
Eigen::MatrixXd load_video_features(const std::filesystem::path& path,
                                    std::optional<Eigen::Index> expected_frames = std::nullopt);

/// Same processing for motion vectors already in memory.
Eigen::MatrixXd video_features(const Eigen::MatrixXd& motion);

/// Result of mixing interference into a clean recording.
struct MixResult {
  SampleBuffer mixed;
  double noise_gain = 0.0;
  double transient_gain = 0.0;
  // 10 log10(P_clean / P_noise) of the scaled noise; NaN without noise.
  double achieved_snr_db = 0.0;
};

/// clean + g_n * noise + g_t * transients. Noise and transients are tiled or
/// truncated to the clean length; either may be empty. g_n sets the
/// whole-sequence SNR to snr_db, g_t scales the transient peak to max|clean|.
MixResult mix_interference(const SampleBuffer& clean, const SampleBuffer& noise, const SampleBuffer& transients,
                           double snr_db);

/// 1 where the clean frame energy exceeds 1% of the largest frame energy.
Eigen::VectorXi label_ground_truth(const SampleBuffer& clean, const FrameSpec& spec = {});

}  // namespace kernelfuse

#endif  // KERNELFUSE_FEATURES_HPP
