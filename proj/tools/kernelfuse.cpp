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

// kernelfuse command-line tool: synthetic data, features, detection, C sweeps
// and connectivity simulation. Every command writes a manifest.json that
// `kernelfuse replay` can re-run.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kernelfuse/bandwidth.hpp"
#include "kernelfuse/connectivity.hpp"
#include "kernelfuse/error.hpp"
#include "kernelfuse/features.hpp"
#include "kernelfuse/matrix_io.hpp"
#include "kernelfuse/synth.hpp"
#include "kernelfuse/vad.hpp"
#include "kernelfuse/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kernelfuse;

namespace {

struct Run {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  json outputs = json::array();
  std::optional<std::uint64_t> seed;
};

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json null_if_nan(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_frames;
  std::string out_dir;
};

void cmd_synth(const SynthArgs& a, Run& run) {
  SynthConfig cfg;
  if (!a.config.empty()) {
    from_json(read_json(a.config), cfg);
    run.inputs["config"] = a.config;
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.n_frames) cfg.n_frames = *a.n_frames;
  validate(cfg);
  const fs::path out = prepare_out_dir(a.out_dir);
  const SynthData data = synth_multiview(cfg);
  write_matrix_csv(out / "v.csv", data.v);
  write_matrix_csv(out / "w.csv", data.w);
  write_labels_csv(out / "labels.csv", data.labels);
  run.config = cfg;
  run.seed = cfg.seed;
  run.outputs = {(out / "v.csv").string(), (out / "w.csv").string(), (out / "labels.csv").string()};
}

// ---- features ------------------------------------------------------------

struct FeaturesArgs {
  std::string wav;
  std::string motion;
  std::string noise;
  std::string transients;
  std::optional<double> snr_db;
  bool resample = false;
  int frame_len = 634;
  int hop = 317;
  std::string out_dir;
};

void cmd_features(const FeaturesArgs& a, Run& run) {
  if (!a.noise.empty() && !a.snr_db) throw UsageError("--noise requires --snr");
  const FrameSpec spec{a.frame_len, a.hop};
  validate(spec);
  const WavReadOptions options{kDefaultSampleRate, a.resample};
  const SampleBuffer clean = load_wav(a.wav, options);
  run.inputs["wav"] = a.wav;

  SampleBuffer mixed = clean;
  json mix = nullptr;
  if (!a.noise.empty() || !a.transients.empty()) {
    const SampleBuffer noise = a.noise.empty() ? SampleBuffer{} : load_wav(a.noise, options);
    const SampleBuffer transients = a.transients.empty() ? SampleBuffer{} : load_wav(a.transients, options);
    if (!a.noise.empty()) run.inputs["noise"] = a.noise;
    if (!a.transients.empty()) run.inputs["transients"] = a.transients;
    MixResult r = mix_interference(clean, noise, transients, a.snr_db.value_or(0.0));
    mix = {{"noise_gain", r.noise_gain},
           {"transient_gain", r.transient_gain},
           {"achieved_snr_db", null_if_nan(r.achieved_snr_db)}};
    mixed = std::move(r.mixed);
  }

  const Eigen::MatrixXd frames = frame_signal(mixed, spec);
  const MfccExtractor extractor(spec.frame_len);
  const Eigen::MatrixXd v = context_concat(extractor.compute_frames(frames));
  std::optional<Eigen::MatrixXd> w;
  if (!a.motion.empty()) {
    w = load_video_features(a.motion, frames.rows());
    run.inputs["motion"] = a.motion;
  }

  const fs::path out = prepare_out_dir(a.out_dir);
  write_matrix_csv(out / "v.csv", v);
  run.outputs.push_back((out / "v.csv").string());
  if (w) {
    write_matrix_csv(out / "w.csv", *w);
    run.outputs.push_back((out / "w.csv").string());
  }
  write_labels_csv(out / "labels.csv", label_ground_truth(clean, spec));
  write_matrix_csv(out / "energy.csv", frames.rowwise().squaredNorm(), {"energy"});
  run.outputs.push_back((out / "labels.csv").string());
  run.outputs.push_back((out / "energy.csv").string());
  run.config = {{"frame_len", spec.frame_len},
                {"hop", spec.hop},
                {"snr_db", a.snr_db ? json(*a.snr_db) : json(nullptr)},
                {"resample", a.resample},
                {"frames", frames.rows()},
                {"mix", mix}};
}

// ---- vad / sweep -----------------------------------------------------------

struct DetectorArgs {
  std::string v;
  std::string w;
  std::string labels;
  std::string energy;
  std::string fusion = "alternating";
  std::string bandwidth = "single_view_rule";
  std::vector<std::string> algorithm1_views{"audio"};
  std::string eigen = "direct";
  double c = 2.0;
  int grid_size = 40;
  std::string out_dir;

  DetectorConfig config() const {
    DetectorConfig cfg;
    cfg.fusion = fusion_from_string(fusion);
    cfg.bandwidth_mode = bandwidth_mode_from_string(bandwidth);
    cfg.apply_algorithm1_to = {false, false};
    for (const auto& view : algorithm1_views) {
      if (view == "audio") {
        cfg.apply_algorithm1_to.audio = true;
      } else if (view == "video") {
        cfg.apply_algorithm1_to.video = true;
      } else {
        throw UsageError("unknown view '" + view + "' (expected audio or video)");
      }
    }
    cfg.eigen_method = eigen_method_from_string(eigen);
    if (!(c > 0)) throw UsageError("--c must be positive");
    cfg.c_single = c;
    cfg.grid_size = grid_size;
    validate(cfg);
    return cfg;
  }
};

struct LoadedViews {
  Eigen::MatrixXd v;
  Eigen::MatrixXd w;
  Eigen::VectorXi labels;
  std::optional<Eigen::VectorXd> energy;
};

LoadedViews load_views(const DetectorArgs& a, Run& run) {
  LoadedViews out{read_matrix(a.v), read_matrix(a.w), read_labels_csv(a.labels), std::nullopt};
  run.inputs["v"] = a.v;
  run.inputs["w"] = a.w;
  run.inputs["labels"] = a.labels;
  if (out.v.rows() != out.w.rows() || out.v.rows() != out.labels.size()) {
    throw DataError("frame counts disagree: v has " + std::to_string(out.v.rows()) + ", w has " +
                    std::to_string(out.w.rows()) + ", labels have " + std::to_string(out.labels.size()));
  }
  if (!a.energy.empty()) {
    const Eigen::MatrixXd e = read_matrix(a.energy);
    if (e.cols() != 1 || e.rows() != out.v.rows()) {
      throw DataError("energy file must be one column with " + std::to_string(out.v.rows()) + " rows, got " +
                      std::to_string(e.rows()) + "x" + std::to_string(e.cols()));
    }
    out.energy = e.col(0);
    run.inputs["energy"] = a.energy;
  }
  return out;
}

void cmd_vad(const DetectorArgs& a, Run& run) {
  const DetectorConfig cfg = a.config();
  const LoadedViews in = load_views(a, run);
  const Detection det = detect(in.v, in.w, cfg, in.energy);
  const RocCurve curve = roc(det.score, in.labels);

  const fs::path out = prepare_out_dir(a.out_dir);
  const Eigen::Index n = in.labels.size();
  Eigen::MatrixXd scores(n, 3);
  scores.col(0) = Eigen::VectorXd::LinSpaced(n, 0, static_cast<double>(n - 1));
  scores.col(1) = det.score.nu1;
  scores.col(2) = in.labels.cast<double>();
  write_matrix_csv(out / "scores.csv", scores, {"frame", "nu1", "label"});

  std::ofstream rocf(out / "roc.csv");
  if (!rocf) throw DataError("cannot open '" + (out / "roc.csv").string() + "' for writing");
  rocf << "tau,pfa,pd\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    rocf << format_double(curve.thresholds[i]) << ',' << format_double(curve.points[i].first) << ','
         << format_double(curve.points[i].second) << '\n';
  }
  rocf.close();

  const auto* report = det.bandwidth_v ? &*det.bandwidth_v : (det.bandwidth_w ? &*det.bandwidth_w : nullptr);
  json summary = {{"auc", curve.auc},
                  {"c_ad", report ? json(report->c_ad) : json(nullptr)},
                  {"epsilon_ad", report ? json(report->epsilon_ad) : json(nullptr)},
                  {"fusion", to_string(cfg.fusion)},
                  {"epsilon_v", det.epsilon_v},
                  {"epsilon_w", det.epsilon_w},
                  {"eigenvalue", det.eigenvalue},
                  {"residual", det.residual},
                  {"complex_fallback", det.complex_fallback},
                  {"orientation", det.score.orientation_source}};
  if (det.bandwidth_v) summary["bandwidth_audio"] = *det.bandwidth_v;
  if (det.bandwidth_w) summary["bandwidth_video"] = *det.bandwidth_w;
  write_json(out / "summary.json", summary);
  run.config = cfg;
  run.outputs = {(out / "scores.csv").string(), (out / "roc.csv").string(), (out / "summary.json").string()};
}

struct SweepArgs {
  DetectorArgs detector;
  double c_min = 0.1;
  double c_max = 2.0;
  int steps = 20;
};

void cmd_sweep(const SweepArgs& a, Run& run) {
  if (!(a.c_min > 0)) throw UsageError("--c-min must be positive");
  if (a.steps < 1) throw UsageError("--steps must be at least 1, the grid would be empty");
  const std::vector<double> grid = linear_grid(a.c_min, a.c_max, a.steps);
  const DetectorConfig cfg = a.detector.config();
  const LoadedViews in = load_views(a.detector, run);
  const SweepResult r = sweep_c(in.v, in.w, in.labels, grid, cfg, in.energy);

  const fs::path out = prepare_out_dir(a.detector.out_dir);
  Eigen::MatrixXd table(static_cast<Eigen::Index>(r.curve.size()), 2);
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    table(static_cast<Eigen::Index>(i), 0) = r.curve[i].c;
    table(static_cast<Eigen::Index>(i), 1) = r.curve[i].auc;
  }
  write_matrix_csv(out / "sweep.csv", table, {"c", "auc"});
  json summary = {{"fusion", to_string(cfg.fusion)},
                  {"video_c", cfg.c_single},
                  {"argmax", {{"c", r.curve[r.argmax].c}, {"auc", r.curve[r.argmax].auc}}},
                  {"algorithm1",
                   {{"c_ad", r.algorithm1.c_ad}, {"epsilon_ad", r.algorithm1.epsilon_ad}, {"auc", r.algorithm1_auc}}},
                  {"bandwidth_audio", r.algorithm1}};
  write_json(out / "summary.json", summary);
  run.config = cfg;
  run.config["c_min"] = a.c_min;
  run.config["c_max"] = a.c_max;
  run.config["steps"] = a.steps;
  run.outputs = {(out / "sweep.csv").string(), (out / "summary.json").string()};
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  int n = 2000;
  double s_v = 3.0;
  double s_w = 3.0;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

void cmd_simulate(const SimulateArgs& a, Run& run) {
  if (a.n < 2) throw UsageError("--n must be at least 2");
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  const MultiviewStats stats = multiview_degree_stats(a.n, a.s_v, a.s_w, a.trials, a.seed);
  const json result = stats;
  std::cout << result.dump(2) << '\n';
  const fs::path out = prepare_out_dir(a.out_dir);
  write_json(out / "simulate.json", result);
  run.config = {{"n", a.n}, {"s_v", a.s_v}, {"s_w", a.s_w}, {"trials", a.trials}};
  run.seed = a.seed;
  run.outputs = {(out / "simulate.json").string()};
}

// ---- driver ----------------------------------------------------------------

void add_detector_options(CLI::App* cmd, DetectorArgs& a) {
  cmd->add_option("--v", a.v, "audio feature matrix (CSV or binary)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--w", a.w, "video feature matrix (CSV or binary)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", a.labels, "per-frame 0/1 labels CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--energy", a.energy, "per-frame audio energy CSV used to orient the score")
      ->check(CLI::ExistingFile);
  cmd->add_option("--fusion", a.fusion, "alternating | hadamard | sum | audio_only | video_only")->capture_default_str();
  cmd->add_option("--bandwidth", a.bandwidth, "single_view_rule | algorithm1")->capture_default_str();
  cmd->add_option("--algorithm1-views", a.algorithm1_views, "views given the multi-view bandwidth")->capture_default_str();
  cmd->add_option("--eigen", a.eigen, "direct | symmetrized")->capture_default_str();
  cmd->add_option("--c", a.c, "single-view bandwidth multiplier")->capture_default_str();
  cmd->add_option("--grid-size", a.grid_size, "bandwidth search grid size")->capture_default_str();
  cmd->add_option("--out-dir", a.out_dir, "output directory")->required();
}

int exit_code_for(const std::exception& e) {
  if (const auto* k = dynamic_cast<const Error*>(&e)) return k->exit_code();
  return static_cast<int>(ErrorKind::data);
}

int run_cli(std::vector<std::string> args);

int replay(const std::string& manifest_path, const std::string& out_dir) {
  const json manifest = read_json(manifest_path);
  if (!manifest.contains("argv") || !manifest["argv"].is_array() || !manifest.contains("cwd")) {
    throw DataError("'" + manifest_path + "' is not a kernelfuse manifest");
  }
  std::vector<std::string> args = manifest["argv"].get<std::vector<std::string>>();
  if (!out_dir.empty()) {
    const std::string absolute = fs::absolute(out_dir).string();
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--out-dir") args[i + 1] = absolute;
    }
  }
  fs::current_path(manifest["cwd"].get<std::string>());
  return run_cli(std::move(args));
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"kernelfuse: multi-view kernel fusion for voice activity detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KERNELFUSE_VERSION);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic two-view data");
  synth_cmd->add_option("--config", synth.config, "SynthConfig JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth.seed, "override the config seed");
  synth_cmd->add_option("--n-frames", synth.n_frames, "override the config frame count");
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();

  FeaturesArgs feat;
  auto* feat_cmd = app.add_subcommand("features", "MFCC and motion features from a clean WAV");
  feat_cmd->add_option("--wav", feat.wav, "clean 16-bit mono WAV")->required()->check(CLI::ExistingFile);
  feat_cmd->add_option("--motion", feat.motion, "per-frame motion vectors CSV")->check(CLI::ExistingFile);
  feat_cmd->add_option("--noise", feat.noise, "background noise WAV")->check(CLI::ExistingFile);
  feat_cmd->add_option("--transients", feat.transients, "transient interference WAV")->check(CLI::ExistingFile);
  feat_cmd->add_option("--snr", feat.snr_db, "noise SNR in dB over the whole sequence");
  feat_cmd->add_flag("--resample", feat.resample, "resample inputs to 8 kHz");
  feat_cmd->add_option("--frame-len", feat.frame_len, "frame length in samples")->capture_default_str();
  feat_cmd->add_option("--hop", feat.hop, "hop in samples")->capture_default_str();
  feat_cmd->add_option("--out-dir", feat.out_dir, "output directory")->required();

  DetectorArgs vad;
  auto* vad_cmd = app.add_subcommand("vad", "detect voice activity and evaluate the ROC");
  add_detector_options(vad_cmd, vad);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "AUC against the audio bandwidth multiplier");
  add_detector_options(sweep_cmd, sweep.detector);
  sweep_cmd->add_option("--c-min", sweep.c_min, "smallest audio multiplier")->capture_default_str();
  sweep_cmd->add_option("--c-max", sweep.c_max, "largest audio multiplier")->capture_default_str();
  sweep_cmd->add_option("--steps", sweep.steps, "number of grid points")->capture_default_str();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo connectivity of random view graphs");
  sim_cmd->add_option("--n", sim.n, "nodes")->capture_default_str();
  sim_cmd->add_option("--s-v", sim.s_v, "mean degree of view v")->capture_default_str();
  sim_cmd->add_option("--s-w", sim.s_w, "mean degree of view w")->capture_default_str();
  sim_cmd->add_option("--trials", sim.trials, "independent graph pairs")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir, "output directory")->capture_default_str();

  std::string manifest_path;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its manifest.json");
  replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out-dir", replay_out, "write outputs here instead of the recorded directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  if (replay_cmd->parsed()) return replay(manifest_path, replay_out);

  const auto start = std::chrono::steady_clock::now();
  Run run;
  std::string out_dir;
  if (synth_cmd->parsed()) {
    run.command = "synth";
    cmd_synth(synth, run);
    out_dir = synth.out_dir;
  } else if (feat_cmd->parsed()) {
    run.command = "features";
    cmd_features(feat, run);
    out_dir = feat.out_dir;
  } else if (vad_cmd->parsed()) {
    run.command = "vad";
    cmd_vad(vad, run);
    out_dir = vad.out_dir;
  } else if (sweep_cmd->parsed()) {
    run.command = "sweep";
    cmd_sweep(sweep, run);
    out_dir = sweep.detector.out_dir;
  } else {
    run.command = "simulate";
    cmd_simulate(sim, run);
    out_dir = sim.out_dir;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {{"command", run.command},
                         {"config", run.config},
                         {"seed", run.seed ? json(*run.seed) : json(nullptr)},
                         {"inputs", run.inputs},
                         {"outputs", run.outputs},
                         {"version", KERNELFUSE_VERSION},
                         {"duration_seconds", seconds},
                         {"argv", args},
                         {"cwd", fs::current_path().string()}};
  write_json(fs::path(out_dir) / "manifest.json", manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "kernelfuse: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
