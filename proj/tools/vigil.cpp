#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vigil/error.hpp"
#include "vigil/pipeline.hpp"

namespace {

using namespace vigil;

struct Overrides {
  std::string config_path;
  std::optional<double> sample_rate;
  std::optional<double> fps;
  std::optional<double> t_alert;
  std::optional<std::string> calibration;
  bool calibrate = false;
  std::optional<std::string> face_cascade;
  std::optional<std::string> eye_cascade;
  std::optional<int> threads;
  bool serial = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "flat JSON config (falls back to $VIGIL_CONFIG)");
  cmd->add_option("--sample-rate", o.sample_rate, "EEG sample rate in Hz, overrides the CSV");
  cmd->add_option("--threads", o.threads, "worker threads (0 = runtime default)");
  cmd->add_flag("--serial", o.serial, "use the serial reference kernels");
}

void add_cascades(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--face-cascade", o.face_cascade, "face cascade XML");
  cmd->add_option("--eye-cascade", o.eye_cascade, "open-eye cascade XML");
}

pipeline::RunConfig resolve_config(const Overrides& o) {
  pipeline::RunConfig config;
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("VIGIL_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) {
    const std::string text = io::read_file(path);
    try {
      config = pipeline::parse_config_json(text);
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.detail());
    }
  }
  if (o.sample_rate) config.sample_rate = o.sample_rate;
  if (o.fps) config.fps = *o.fps;
  if (o.t_alert) config.t_alert = *o.t_alert;
  if (o.calibration) config.calibration = *o.calibration;
  if (o.calibrate) config.calibrate = true;
  if (o.face_cascade) config.face_cascade = *o.face_cascade;
  if (o.eye_cascade) config.eye_cascade = *o.eye_cascade;
  if (o.threads) config.threads = *o.threads;
  if (o.serial) config.parallel = false;
  return config;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text << std::flush;
  } else {
    io::write_file(out, text);
  }
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "vigil: warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver drowsiness analysis from EEG and eye-closure data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pipeline::kVersion));

  Overrides o;
  pipeline::RunInputs inputs;
  std::string out;
  double speed = 1.0;

  auto setup_run = [&](CLI::App* cmd) {
    cmd->add_option("--eeg", inputs.eeg, "EEG CSV")->required();
    auto* blink = cmd->add_option("--blink", inputs.blink, "eye-state trace");
    auto* frames = cmd->add_option("--frames", inputs.frames, "directory of .pgm/.png frames");
    blink->excludes(frames);
    add_cascades(cmd, o);
    add_common(cmd, o);
    cmd->add_option("--fps", o.fps, "frame / tick rate in Hz");
    cmd->add_option("--t-alert", o.t_alert, "closure seconds that escalate the video level");
    cmd->add_option("--calibration", o.calibration, "calibration JSON from `vigil calibrate`");
    cmd->add_flag("--calibrate", o.calibrate, "fit fuzzy universes on this recording");
    cmd->add_option("--out", out, "report path (stdout for analyze when absent)");
  };

  auto* analyze = app.add_subcommand("analyze", "batch analysis, writes a JSON report");
  setup_run(analyze);

  auto* replay = app.add_subcommand("replay", "paced replay, alert events on stdout as JSON lines");
  setup_run(replay);
  replay->add_option("--speed", speed, "replay speed multiplier");

  std::string frames_dir;
  auto* detect = app.add_subcommand("detect", "frames -> eye-state trace");
  detect->add_option("--frames", frames_dir, "directory of .pgm/.png frames")->required();
  add_cascades(detect, o);
  add_common(detect, o);
  detect->add_option("--fps", o.fps, "frame rate in Hz");
  detect->add_option("--out", out, "trace path (stdout when absent)");

  std::vector<std::string> eeg_paths;
  auto* calibrate = app.add_subcommand("calibrate", "EEG recordings -> fuzzy universe calibration");
  calibrate->add_option("--eeg", eeg_paths, "EEG CSVs")->required();
  add_common(calibrate, o);
  calibrate->add_option("--out", out, "calibration JSON (stdout when absent)");

  std::string spec_path;
  std::uint64_t seed = 0;
  auto* generate = app.add_subcommand("generate", "synthetic EEG from a component spec");
  generate->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  generate->add_option("--seed", seed, "noise seed");
  generate->add_option("--out", out, "EEG CSV (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*analyze || *replay) {
      const bool is_replay = replay->parsed();
      const auto config = resolve_config(o);
      pipeline::RunHooks hooks;
      if (is_replay) {
        if (!(speed > 0.0) || !std::isfinite(speed)) {
          throw Error(Errc::InvalidSpeed, "speed must be a positive number");
        }
        const auto t0 = std::chrono::steady_clock::now();
        hooks.before_tick = [t0, speed](double t) {
          std::this_thread::sleep_until(t0 + std::chrono::duration<double>(t / speed));
        };
        hooks.on_event = [](const fusion::AlertEvent& e) { std::cout << fusion::to_json_line(e) << std::endl; };
      }
      const auto report = pipeline::run(inputs, config, hooks);
      print_warnings(report.warnings);
      const std::string json =
          pipeline::report_to_json(report, {is_replay ? "replay" : "analyze", pipeline::utc_timestamp()});
      if (!is_replay || !out.empty()) emit(out, json);
      return report.onset_count() > 0 ? 2 : 0;
    }
    if (*detect) {
      const auto config = resolve_config(o);
      emit(out, io::write_blink_trace(pipeline::detect_trace(frames_dir, config)));
      return 0;
    }
    if (*calibrate) {
      const auto config = resolve_config(o);
      pipeline::validate(config, false);
      if (config.threads > 0) set_max_threads(config.threads);
      std::vector<std::string> warnings;
      auto warn = [&](std::string_view msg) { warnings.emplace_back(msg); };
      const auto feats = pipeline::collect_features(eeg_paths, config, warn);
      const auto cal = fcm::calibrate_universes(feats, pipeline::fcm_config(config), pipeline::exec_of(config), warn);
      print_warnings(warnings);
      emit(out, calibration_to_json(cal));
      return 0;
    }
    if (*generate) {
      const std::string text = io::read_file(spec_path);
      io::SynthSpec spec;
      try {
        spec = io::parse_synth_spec_json(text);
      } catch (const Error& e) {
        throw Error(e.code(), spec_path + ": " + e.detail());
      }
      emit(out, io::write_eeg_csv(io::generate_synthetic_eeg(spec, seed)));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "vigil: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
