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

#include "kernelfuse/features.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "kernelfuse/error.hpp"
#include "kernelfuse/matrix_io.hpp"
#include "kernelfuse/parallel.hpp"

namespace kernelfuse {

void validate(const FrameSpec& spec) {
  if (spec.frame_len <= 0 || spec.hop <= 0 || spec.hop > spec.frame_len) {
    throw DataError("frame spec needs 0 < hop <= frame_len, got frame_len=" + std::to_string(spec.frame_len) +
                    " hop=" + std::to_string(spec.hop));
  }
}

Eigen::Index frame_count(Eigen::Index n_samples, const FrameSpec& spec) {
  validate(spec);
  if (n_samples < spec.frame_len) return 0;
  return (n_samples - spec.frame_len) / spec.hop + 1;
}

Eigen::MatrixXd frame_signal(const SampleBuffer& buf, const FrameSpec& spec) {
  const Eigen::Index count = frame_count(buf.size(), spec);
  if (count == 0) {
    throw DataError("signal of " + std::to_string(buf.size()) + " samples is shorter than one frame of " +
                    std::to_string(spec.frame_len));
  }
  Eigen::MatrixXd frames(count, spec.frame_len);
  for (Eigen::Index i = 0; i < count; ++i) {
    frames.row(i) = buf.samples.segment(i * spec.hop, spec.frame_len).transpose();
  }
  return frames;
}

Eigen::VectorXd frame_energy(const SampleBuffer& buf, const FrameSpec& spec) {
  return frame_signal(buf, spec).rowwise().squaredNorm();
}

void validate(const MfccConfig& cfg) {
  if (cfg.fft_size < 2 || cfg.n_mel_filters < 1 || cfg.n_coeffs < 1 || cfg.n_coeffs > cfg.n_mel_filters) {
    throw DataError("MFCC config needs fft_size >= 2 and 1 <= n_coeffs <= n_mel_filters");
  }
  if (!(cfg.sample_rate > 0) || !(cfg.mel_low >= 0) || !(cfg.mel_high > cfg.mel_low) ||
      cfg.mel_high > cfg.sample_rate / 2 + 1e-9) {
    throw DataError("MFCC band must satisfy 0 <= mel_low < mel_high <= sample_rate / 2");
  }
  if (!(cfg.log_floor > 0)) throw DataError("MFCC log floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MfccExtractor::MfccExtractor(int frame_len, const MfccConfig& cfg) : frame_len_(frame_len), cfg_(cfg) {
  validate(cfg_);
  if (frame_len < 2 || frame_len > cfg_.fft_size) {
    throw DataError("frame length " + std::to_string(frame_len) + " must lie in [2, fft_size=" +
                    std::to_string(cfg_.fft_size) + "]");
  }
  window_.resize(frame_len);
  for (int i = 0; i < frame_len; ++i) {
    window_(i) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (frame_len - 1));
  }

  const int n_filters = cfg_.n_mel_filters;
  const int n_bins = cfg_.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg_.mel_low);
  const double mel_hi = hz_to_mel(cfg_.mel_high);
  Eigen::VectorXd edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) edges(i) = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_filters + 1));
  centers_hz_ = edges.segment(1, n_filters);
  filterbank_ = Eigen::MatrixXd::Zero(n_filters, n_bins);
  for (int f = 0; f < n_filters; ++f) {
    const double left = edges(f);
    const double center = edges(f + 1);
    const double right = edges(f + 2);
    for (int k = 0; k < n_bins; ++k) {
      const double hz = k * cfg_.sample_rate / cfg_.fft_size;
      if (hz > left && hz <= center) {
        filterbank_(f, k) = (hz - left) / (center - left);
      } else if (hz > center && hz < right) {
        filterbank_(f, k) = (right - hz) / (right - center);
      }
    }
  }

  // Orthonormal DCT-II rows.
  dct_.resize(cfg_.n_coeffs, n_filters);
  for (int q = 0; q < cfg_.n_coeffs; ++q) {
    const double scale = std::sqrt((q == 0 ? 1.0 : 2.0) / n_filters);
    for (int m = 0; m < n_filters; ++m) dct_(q, m) = scale * std::cos(std::numbers::pi * q * (m + 0.5) / n_filters);
  }
}

Eigen::VectorXd MfccExtractor::power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame) const {
  if (frame.size() != frame_len_) {
    throw DataError("frame has " + std::to_string(frame.size()) + " samples, extractor expects " +
                    std::to_string(frame_len_));
  }
  std::vector<double> padded(static_cast<std::size_t>(cfg_.fft_size), 0.0);
  for (int i = 0; i < frame_len_; ++i) padded[static_cast<std::size_t>(i)] = frame(i) * window_(i);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  const int n_bins = cfg_.fft_size / 2 + 1;
  Eigen::VectorXd power(n_bins);
  for (int k = 0; k < n_bins; ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);
  return power;
}

Eigen::VectorXd MfccExtractor::mel_energies(const Eigen::Ref<const Eigen::VectorXd>& frame) const {
  return filterbank_ * power_spectrum(frame);
}

Eigen::VectorXd MfccExtractor::compute(const Eigen::Ref<const Eigen::VectorXd>& frame) const {
  const Eigen::VectorXd log_energy = mel_energies(frame).cwiseMax(cfg_.log_floor).array().log().matrix();
  return dct_ * log_energy;
}

Eigen::MatrixXd MfccExtractor::compute_frames(const Eigen::MatrixXd& frames) const {
  Eigen::MatrixXd out(frames.rows(), cfg_.n_coeffs);
  parallel_for(static_cast<std::size_t>(frames.rows()), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    out.row(row) = compute(frames.row(row).transpose()).transpose();
  });
  return out;
}

Eigen::VectorXd mfcc(const Eigen::Ref<const Eigen::VectorXd>& frame, const MfccConfig& cfg) {
  return MfccExtractor(static_cast<int>(frame.size()), cfg).compute(frame);
}

Eigen::MatrixXd context_concat(const Eigen::MatrixXd& per_frame) {
  const Eigen::Index n = per_frame.rows();
  const Eigen::Index dim = per_frame.cols();
  if (n < 3) throw DataError("context concatenation needs at least 3 frames, got " + std::to_string(n));
  Eigen::MatrixXd out(n, 3 * dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index prev = i == 0 ? 0 : i - 1;
    const Eigen::Index next = i == n - 1 ? n - 1 : i + 1;
    out.block(i, 0, 1, dim) = per_frame.row(prev);
    out.block(i, dim, 1, dim) = per_frame.row(i);
    out.block(i, 2 * dim, 1, dim) = per_frame.row(next);
  }
  return out;
}

Eigen::MatrixXd video_features(const Eigen::MatrixXd& motion) {
  if (!motion.allFinite()) throw DataError("motion features contain non-finite values");
  return context_concat(motion.cwiseAbs());
}

Eigen::MatrixXd load_video_features(const std::filesystem::path& path, std::optional<Eigen::Index> expected_frames) {
  const Eigen::MatrixXd motion = read_matrix(path);
  if (expected_frames && motion.rows() != *expected_frames) {
    throw DataError("video features in '" + path.string() + "' have " + std::to_string(motion.rows()) +
                    " frames but the audio has " + std::to_string(*expected_frames) + " frames");
  }
  return video_features(motion);
}

namespace {

Eigen::VectorXd tile_to(const Eigen::VectorXd& src, Eigen::Index len) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(len);
  if (src.size() == 0) return out;
  for (Eigen::Index i = 0; i < len; ++i) out(i) = src(i % src.size());
  return out;
}

}  // namespace

MixResult mix_interference(const SampleBuffer& clean, const SampleBuffer& noise, const SampleBuffer& transients,
                           double snr_db) {
  const Eigen::Index len = clean.size();
  if (len == 0) throw DataError("clean signal is empty");
  const double clean_power = clean.samples.squaredNorm() / static_cast<double>(len);
  if (!(clean_power > 0)) throw DataError("clean signal is silent; SNR is undefined");
  for (const SampleBuffer* other : {&noise, &transients}) {
    if (other->size() > 0 && other->rate != clean.rate) {
      throw DataError("interference sampled at " + std::to_string(other->rate) + " Hz, clean signal at " +
                      std::to_string(clean.rate) + " Hz");
    }
  }

  MixResult out;
  out.mixed.rate = clean.rate;
  out.mixed.samples = clean.samples;
  out.achieved_snr_db = std::numeric_limits<double>::quiet_NaN();

  const Eigen::VectorXd n = tile_to(noise.samples, len);
  const double noise_power = n.squaredNorm() / static_cast<double>(len);
  if (noise_power > 0) {
    out.noise_gain = std::sqrt(clean_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
    const Eigen::VectorXd scaled = out.noise_gain * n;
    out.mixed.samples += scaled;
    out.achieved_snr_db = 10.0 * std::log10(clean_power / (scaled.squaredNorm() / static_cast<double>(len)));
  }

  const Eigen::VectorXd t = tile_to(transients.samples, len);
  const double transient_peak = t.cwiseAbs().maxCoeff();
  if (transient_peak > 0) {
    out.transient_gain = clean.samples.cwiseAbs().maxCoeff() / transient_peak;
    out.mixed.samples += out.transient_gain * t;
  }
  return out;
}

Eigen::VectorXi label_ground_truth(const SampleBuffer& clean, const FrameSpec& spec) {
  const Eigen::VectorXd energy = frame_energy(clean, spec);
  const double threshold = 0.01 * energy.maxCoeff();
  return (energy.array() > threshold).cast<int>().matrix();
}

}  // namespace kernelfuse
