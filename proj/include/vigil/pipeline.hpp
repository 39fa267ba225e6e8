#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/calibration.hpp"
#include "vigil/clustering.hpp"
#include "vigil/dsp.hpp"
#include "vigil/exec.hpp"
#include "vigil/features.hpp"
#include "vigil/fusion.hpp"
#include "vigil/fuzzy.hpp"
#include "vigil/vision.hpp"

namespace vigil::pipeline {

inline constexpr std::string_view kVersion = "0.1.0";

// Flat run configuration. JSON keys match the member names.
struct RunConfig {
  std::optional<double> sample_rate;  // overrides the CSV header when set
  double window_len = 20.0;
  double hop = 20.0;
  bool detrend = true;
  bool hann = false;
  double eps = 1e-12;
  bool invert_arousal = false;
  double smoothing = 1.0;  // 1 = no smoothing across windows

  std::string calibration;  // calibration JSON path, empty = default universes
  bool calibrate = false;   // fit universes on the analyzed recording itself
  double fcm_m = 2.0;
  double fcm_tol = 1e-6;
  int fcm_max_iter = 300;
  std::uint64_t fcm_seed = 0;
  bool fcm_zscore = false;

  std::string face_cascade;
  std::string eye_cascade;
  double scale_factor = 1.1;
  int step = 2;
  int min_neighbors = 3;
  double min_stddev = 1.0;
  int face_min_size = 0;
  int eye_min_size = 0;

  double fps = 25.0;
  double t_alert = 3.0;
  double perclos_window = 60.0;
  double release_hold = 5.0;
  std::optional<double> duration_tolerance;  // defaults to window_len

  bool parallel = true;
  int threads = 0;  // 0 = OpenMP default

  bool operator==(const RunConfig&) const = default;
};

// Keys present in `text` replace the values of `base`.
// Throws Error(InvalidConfig) on unknown keys or wrong types.
RunConfig parse_config_json(std::string_view text, RunConfig base = {});

std::string config_to_json(const RunConfig& config);

// Numeric ranges and file existence. Throws Error(InvalidConfig) or Error(IoError).
void validate(const RunConfig& config, bool needs_cascades);

dsp::WindowPlan window_plan(const RunConfig& config);
dsp::SpectralOptions spectral_options(const RunConfig& config);
features::FeatureOptions feature_options(const RunConfig& config);
fcm::FcmConfig fcm_config(const RunConfig& config);
vision::DetectParams face_params(const RunConfig& config);
vision::DetectParams eye_params(const RunConfig& config);
Exec exec_of(const RunConfig& config);

struct RunInputs {
  std::string eeg;     // EEG CSV path
  std::string blink;   // blink trace path, or
  std::string frames;  // frame directory (needs both cascades)
};

struct WindowEntry {
  double start = 0.0;
  features::FeatureVector features;
  fuzzy::Inference inference;
  Level eeg_level = Level::Alert;
};

struct FrameEntry {
  std::string file;
  vision::FrameAnalysis analysis;
};

struct TickEntry {
  double t = 0.0;
  io::EyeState state = io::EyeState::Open;
  double closure = 0.0;
  double perclos = 0.0;
  Level video_level = Level::Alert;
  int window = 0;  // index of the EEG window sampled at this tick
  Level eeg_level = Level::Alert;
  Level fused = Level::Alert;
};

struct RunReport {
  RunConfig config;
  RunInputs inputs;
  double eeg_duration = 0.0;
  double video_duration = 0.0;
  std::optional<Calibration> calibration;
  std::vector<dsp::BandPowers> powers;
  std::vector<WindowEntry> windows;
  std::vector<FrameEntry> frames;
  std::vector<TickEntry> ticks;
  std::vector<fusion::AlertEvent> alert_events;
  std::vector<std::string> warnings;

  std::size_t onset_count() const;
};

struct RunHooks {
  std::function<void(double t)> before_tick;  // pacing
  std::function<void(const fusion::AlertEvent&)> on_event;
};

// Loads inputs, runs the EEG and video paths (concurrently when parallel),
// then fuses at every video tick. Module errors are re-raised with the file
// they came from. Throws Error(DurationMismatch) when the EEG and video
// durations differ by more than the tolerance.
RunReport run(const RunInputs& inputs, const RunConfig& config, const RunHooks& hooks = {});

// Video ticks t_i = i / fps for i = 0 .. floor(duration * fps).
std::vector<double> tick_times(double duration, double fps);

// Index of the latest window whose start is <= t (0 before the first).
int window_at(const std::vector<WindowEntry>& windows, double t);

struct ReportMeta {
  std::string mode;          // "analyze" or "replay"
  std::string generated_at;  // ISO-8601 UTC
};

// Deterministic JSON; wall-clock and mode data live under "run".
std::string report_to_json(const RunReport& report, const ReportMeta& meta);

std::string utc_timestamp();

// Feature vectors of every full window of every recording, for calibration.
std::vector<features::FeatureVector> collect_features(const std::vector<std::string>& eeg_paths,
                                                      const RunConfig& config,
                                                      const io::WarningSink& on_warning = {});

// Frames -> per-frame eye states -> blink trace sampled at the configured fps.
io::BlinkTrace detect_trace(const std::string& frames_dir, const RunConfig& config);

}  // namespace vigil::pipeline
