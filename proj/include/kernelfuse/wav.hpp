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

#ifndef KERNELFUSE_WAV_HPP
#define KERNELFUSE_WAV_HPP

#include <Eigen/Dense>

#include <filesystem>

namespace kernelfuse {

inline constexpr int kDefaultSampleRate = 8000;

/// Mono signal with amplitudes in [-1, 1].
struct SampleBuffer {
  Eigen::VectorXd samples;
  int rate = kDefaultSampleRate;

  Eigen::Index size() const { return samples.size(); }
};

struct WavReadOptions {
  int expected_rate = kDefaultSampleRate;
  // Convert other rates to expected_rate instead of rejecting them.
  bool resample = false;
};

/// Reads 16-bit PCM mono WAV; samples are scaled by 1/32768.
SampleBuffer load_wav(const std::filesystem::path& path, const WavReadOptions& options = {});

/// Writes 16-bit PCM mono WAV. Samples are rounded to the nearest step of
/// 1/32768 and clipped to the representable range.
void write_wav(const std::filesystem::path& path, const SampleBuffer& buffer);

/// Band-limited rate conversion with a Hann-windowed sinc kernel.
SampleBuffer resample(const SampleBuffer& in, int target_rate);

}  // namespace kernelfuse

#endif  // KERNELFUSE_WAV_HPP
