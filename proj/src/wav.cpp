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

#include "kernelfuse/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "kernelfuse/error.hpp"

namespace kernelfuse {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

SampleBuffer load_wav(const std::filesystem::path& path, const WavReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = "'" + path.string() + "'";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(name + " is not a RIFF/WAVE file");
  }

  bool have_format = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw DataError(name + " has a truncated fmt chunk");
      std::uint16_t format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible && available >= 26) format = read_u16(chunk + 8 + 24);
      if (format != kFormatPcm) throw DataError(name + " is not PCM (format tag " + std::to_string(format) + ")");
      have_format = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = available;
    }
    pos = body + size + (size & 1);
  }
  if (!have_format) throw DataError(name + " has no fmt chunk");
  if (data == nullptr) throw DataError(name + " has no data chunk");
  if (channels != 1) throw DataError(name + " has " + std::to_string(channels) + " channels; only mono is supported");
  if (bits != 16) throw DataError(name + " has " + std::to_string(bits) + "-bit samples; only 16-bit PCM is supported");

  SampleBuffer out;
  out.rate = static_cast<int>(rate);
  out.samples.resize(static_cast<Eigen::Index>(data_size / 2));
  for (Eigen::Index i = 0; i < out.samples.size(); ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(data + 2 * i));
    out.samples(i) = static_cast<double>(raw) / 32768.0;
  }
  if (options.expected_rate > 0 && out.rate != options.expected_rate) {
    if (!options.resample) {
      throw DataError(name + " is sampled at " + std::to_string(out.rate) + " Hz, expected " +
                      std::to_string(options.expected_rate) + " Hz (pass --resample to convert)");
    }
    out = resample(out, options.expected_rate);
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const SampleBuffer& buffer) {
  if (buffer.rate <= 0) throw DataError("sample rate must be positive");
  const auto count = static_cast<std::uint32_t>(buffer.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(count));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * count);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buffer.rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * count);
  for (Eigen::Index i = 0; i < buffer.samples.size(); ++i) {
    const double scaled = std::round(buffer.samples(i) * 32768.0);
    const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open '" + path.string() + "' for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("write to '" + path.string() + "' failed");
}

SampleBuffer resample(const SampleBuffer& in, int target_rate) {
  if (in.rate <= 0 || target_rate <= 0) throw DataError("sample rates must be positive");
  if (in.rate == target_rate) return in;
  constexpr int kHalfTaps = 32;
  const double ratio = static_cast<double>(target_rate) / in.rate;
  const double cutoff = std::min(1.0, ratio);  // relative to the input Nyquist
  const auto out_len = static_cast<Eigen::Index>(std::floor(static_cast<double>(in.size()) * ratio));
  SampleBuffer out;
  out.rate = target_rate;
  out.samples = Eigen::VectorXd::Zero(out_len);
  const double half_width = kHalfTaps / cutoff;
  for (Eigen::Index j = 0; j < out_len; ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto first = static_cast<Eigen::Index>(std::ceil(t - half_width));
    const auto last = static_cast<Eigen::Index>(std::floor(t + half_width));
    double acc = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(first, 0); i <= std::min<Eigen::Index>(last, in.size() - 1); ++i) {
      const double x = static_cast<double>(i) - t;
      const double arg = std::numbers::pi * cutoff * x;
      const double sinc = x == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * x / half_width);
      acc += in.samples(i) * cutoff * sinc * window;
    }
    out.samples(j) = acc;
  }
  return out;
}

}  // namespace kernelfuse
