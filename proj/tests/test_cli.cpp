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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kernelfuse/features.hpp"
#include "kernelfuse/matrix_io.hpp"
#include "kernelfuse/vad.hpp"
#include "kernelfuse/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kernelfuse;

namespace {

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "kernelfuse_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("'") + KERNELFUSE_CLI_PATH + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string views(const fs::path& dir) {
  return "--v " + q(dir / "v.csv") + " --w " + q(dir / "w.csv") + " --labels " + q(dir / "labels.csv");
}

fs::path synth_data(const std::string& name, const json& config) {
  const fs::path dir = workdir(name);
  std::ofstream(dir / "config.json") << config.dump();
  REQUIRE(run("synth --config " + q(dir / "config.json") + " --out-dir " + q(dir)) == 0);
  return dir;
}

}  // namespace

TEST_CASE("synth is deterministic and honours the frame count") {
  const fs::path a = workdir("synth_a");
  const fs::path b = workdir("synth_b");
  REQUIRE(run("synth --seed 3 --n-frames 100 --out-dir " + q(a)) == 0);
  REQUIRE(run("synth --seed 3 --n-frames 100 --out-dir " + q(b)) == 0);
  for (const char* f : {"v.csv", "w.csv", "labels.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(read_matrix(a / "v.csv").rows() == 100);
  CHECK(read_labels_csv(a / "labels.csv").size() == 100);
  const json manifest = load_json(a / "manifest.json");
  CHECK(manifest.at("command") == "synth");
  CHECK(manifest.at("seed") == 3);
  CHECK(manifest.at("outputs").size() == 3);
}

TEST_CASE("vad on clean synthetic data is perfect") {
  const fs::path dir = synth_data(
      "clean", {{"n_frames", 200}, {"audio_interference_rate", 0.0}, {"video_interference_rate", 0.0}, {"noise", 0.0}});
  REQUIRE(run("vad " + views(dir) + " --out-dir " + q(dir / "out")) == 0);
  const json summary = load_json(dir / "out" / "summary.json");
  CHECK(summary.at("auc") == 1.0);
  CHECK(summary.at("fusion") == "alternating");
  CHECK(read_matrix(dir / "out" / "scores.csv").rows() == 200);
  const Eigen::MatrixXd rocm = read_matrix(dir / "out" / "roc.csv");
  CHECK(std::isinf(rocm(0, 0)));
  CHECK(rocm(rocm.rows() - 1, 1) == 1.0);
}

TEST_CASE("algorithm1 bandwidth lands inside the grid") {
  const fs::path dir = synth_data("alg1", {{"n_frames", 200}, {"seed", 4}});
  REQUIRE(run("vad " + views(dir) + " --bandwidth algorithm1 --out-dir " + q(dir / "out")) == 0);
  const json summary = load_json(dir / "out" / "summary.json");
  const double c_ad = summary.at("c_ad");
  CHECK(c_ad > 0.0);
  CHECK(c_ad <= 2.0);
  CHECK(summary.at("bandwidth_audio").at("visited").size() >= 5);
}

TEST_CASE("audio-only CLI scores match the library") {
  const fs::path dir = synth_data("audio_only", {{"n_frames", 150}, {"seed", 8}});
  REQUIRE(run("vad " + views(dir) + " --fusion audio_only --out-dir " + q(dir / "out")) == 0);
  DetectorConfig cfg;
  cfg.fusion = Fusion::audio_only;
  const Eigen::VectorXi labels = read_labels_csv(dir / "labels.csv");
  const Detection det = detect(read_matrix(dir / "v.csv"), read_matrix(dir / "w.csv"), cfg);
  const Eigen::MatrixXd scores = read_matrix(dir / "out" / "scores.csv");
  CHECK((scores.col(1) - det.score.nu1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(load_json(dir / "out" / "summary.json").at("auc").get<double>() == doctest::Approx(roc(det.score, labels).auc));
}

TEST_CASE("sweep writes one row per grid point") {
  const fs::path dir = synth_data("sweep", {{"n_frames", 120}, {"seed", 2}});
  REQUIRE(run("sweep " + views(dir) + " --out-dir " + q(dir / "full")) == 0);
  const Eigen::MatrixXd table = read_matrix(dir / "full" / "sweep.csv");
  CHECK(table.rows() == 20);
  CHECK(table(0, 0) == 0.1);
  CHECK(table(19, 0) == 2.0);
  const json summary = load_json(dir / "full" / "summary.json");
  CHECK(summary.at("argmax").at("auc").get<double>() == table.col(1).maxCoeff());

  REQUIRE(run("sweep " + views(dir) + " --c-min 0.7 --steps 1 --out-dir " + q(dir / "one")) == 0);
  const Eigen::MatrixXd single = read_matrix(dir / "one" / "sweep.csv");
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == 0.7);
  CHECK(run("sweep " + views(dir) + " --steps 0 --out-dir " + q(dir / "none")) == 1);
}

TEST_CASE("simulate is reproducible") {
  const fs::path a = workdir("sim_a");
  const fs::path b = workdir("sim_b");
  REQUIRE(run("simulate --n 300 --trials 5 --seed 9 --out-dir " + q(a)) == 0);
  REQUIRE(run("simulate --n 300 --trials 5 --seed 9 --out-dir " + q(b)) == 0);
  const json ja = load_json(a / "simulate.json");
  CHECK(ja == load_json(b / "simulate.json"));
  CHECK(ja.at("predicted_mean_degree") == 9.0);
}

TEST_CASE("exit codes distinguish usage from data errors") {
  const fs::path dir = synth_data("errors", {{"n_frames", 50}});
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("vad " + views(dir) + " --fusion product --out-dir " + q(dir / "out")) == 1);
  CHECK(run("vad --v " + q(dir / "missing.csv") + " --w " + q(dir / "w.csv") + " --labels " +
            q(dir / "labels.csv") + " --out-dir " + q(dir / "out")) == 1);
  std::ofstream(dir / "short_labels.csv") << "label\n0\n1\n";
  CHECK(run("vad --v " + q(dir / "v.csv") + " --w " + q(dir / "w.csv") + " --labels " + q(dir / "short_labels.csv") +
            " --out-dir " + q(dir / "out")) == 2);
  std::ofstream(dir / "bad.json") << R"({"n_frames": 2})";
  CHECK(run("synth --config " + q(dir / "bad.json") + " --out-dir " + q(dir / "bad")) == 2);
}

TEST_CASE("replay reproduces the outputs byte for byte") {
  const fs::path dir = synth_data("replay", {{"n_frames", 120}, {"seed", 11}});
  REQUIRE(run("vad " + views(dir) + " --fusion hadamard --out-dir " + q(dir / "first")) == 0);
  REQUIRE(run("replay " + q(dir / "first" / "manifest.json") + " --out-dir " + q(dir / "second")) == 0);
  CHECK(slurp(dir / "first" / "scores.csv") == slurp(dir / "second" / "scores.csv"));
  CHECK(slurp(dir / "first" / "roc.csv") == slurp(dir / "second" / "roc.csv"));
  CHECK(load_json(dir / "second" / "manifest.json").at("config") == load_json(dir / "first" / "manifest.json").at("config"));
}

TEST_CASE("features from a 60 s recording") {
  const fs::path dir = workdir("features");
  SampleBuffer speech;
  speech.samples.resize(480000);
  SampleBuffer hum;
  hum.samples.resize(48000);
  for (Eigen::Index i = 0; i < speech.size(); ++i) {
    const double t = static_cast<double>(i) / 8000.0;
    const double envelope = std::sin(2 * std::numbers::pi * 0.25 * t) > 0 ? 0.5 : 0.0;
    speech.samples(i) = envelope * std::sin(2 * std::numbers::pi * 300 * t);
  }
  for (Eigen::Index i = 0; i < hum.size(); ++i) hum.samples(i) = 0.3 * std::sin(2 * std::numbers::pi * 50 * i / 8000.0);
  write_wav(dir / "speech.wav", speech);
  write_wav(dir / "hum.wav", hum);
  std::ofstream motion(dir / "motion.csv");
  motion << "dx,dy\n";
  for (int i = 0; i < 1513; ++i) motion << (i % 7) * 0.1 << ',' << -(i % 3) * 0.2 << '\n';
  motion.close();

  REQUIRE(run("features --wav " + q(dir / "speech.wav") + " --motion " + q(dir / "motion.csv") + " --noise " +
              q(dir / "hum.wav") + " --snr 5 --out-dir " + q(dir / "out")) == 0);
  CHECK(read_matrix(dir / "out" / "v.csv").rows() == 1513);
  CHECK(read_matrix(dir / "out" / "v.csv").cols() == 39);
  CHECK(read_matrix(dir / "out" / "w.csv").rows() == 1513);
  CHECK(read_labels_csv(dir / "out" / "labels.csv").size() == 1513);
  const double snr = load_json(dir / "out" / "manifest.json").at("config").at("mix").at("achieved_snr_db");
  CHECK(std::abs(snr - 5.0) <= 0.01);

  CHECK(run("features --wav " + q(dir / "speech.wav") + " --noise " + q(dir / "hum.wav") + " --out-dir " +
            q(dir / "nosnr")) == 1);
}
