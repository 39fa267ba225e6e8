#include "vigil/pipeline.hpp"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <future>

#include <json.hpp>

#include "text.hpp"
#include "vigil/error.hpp"

namespace vigil::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Re-raises a module error with the file it came from.
template <typename F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

[[noreturn]] void bad_key(const std::string& key, std::string_view expected) {
  throw Error(Errc::InvalidConfig, "config key '" + key + "' expects " + std::string(expected));
}

void read_into(const json& v, const std::string& key, double& out) {
  if (!v.is_number()) bad_key(key, "a number");
  out = v.get<double>();
}

void read_into(const json& v, const std::string& key, std::optional<double>& out) {
  if (v.is_null()) {
    out.reset();
    return;
  }
  if (!v.is_number()) bad_key(key, "a number or null");
  out = v.get<double>();
}

void read_into(const json& v, const std::string& key, int& out) {
  if (!v.is_number_integer()) bad_key(key, "an integer");
  out = v.get<int>();
}

void read_into(const json& v, const std::string& key, std::uint64_t& out) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad_key(key, "a non-negative integer");
  out = v.get<std::uint64_t>();
}

void read_into(const json& v, const std::string& key, bool& out) {
  if (!v.is_boolean()) bad_key(key, "a boolean");
  out = v.get<bool>();
}

void read_into(const json& v, const std::string& key, std::string& out) {
  if (!v.is_string()) bad_key(key, "a string");
  out = v.get<std::string>();
}

template <typename Visit>
void for_each_field(RunConfig& c, Visit&& visit) {
  visit("sample_rate", c.sample_rate);
  visit("window_len", c.window_len);
  visit("hop", c.hop);
  visit("detrend", c.detrend);
  visit("hann", c.hann);
  visit("eps", c.eps);
  visit("invert_arousal", c.invert_arousal);
  visit("smoothing", c.smoothing);
  visit("calibration", c.calibration);
  visit("calibrate", c.calibrate);
  visit("fcm_m", c.fcm_m);
  visit("fcm_tol", c.fcm_tol);
  visit("fcm_max_iter", c.fcm_max_iter);
  visit("fcm_seed", c.fcm_seed);
  visit("fcm_zscore", c.fcm_zscore);
  visit("face_cascade", c.face_cascade);
  visit("eye_cascade", c.eye_cascade);
  visit("scale_factor", c.scale_factor);
  visit("step", c.step);
  visit("min_neighbors", c.min_neighbors);
  visit("min_stddev", c.min_stddev);
  visit("face_min_size", c.face_min_size);
  visit("eye_min_size", c.eye_min_size);
  visit("fps", c.fps);
  visit("t_alert", c.t_alert);
  visit("perclos_window", c.perclos_window);
  visit("release_hold", c.release_hold);
  visit("duration_tolerance", c.duration_tolerance);
  visit("parallel", c.parallel);
  visit("threads", c.threads);
}

ordered_json config_json(const RunConfig& config) {
  ordered_json j;
  RunConfig copy = config;
  for_each_field(copy, [&](const char* key, auto& value) {
    using T = std::decay_t<decltype(value)>;
    if constexpr (std::is_same_v<T, std::optional<double>>) {
      j[key] = value ? ordered_json(*value) : ordered_json(nullptr);
    } else {
      j[key] = value;
    }
  });
  return j;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidConfig, what);
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::is_regular_file(path)) throw Error(Errc::IoError, what + " not found: " + path);
}

struct EegPart {
  double duration = 0.0;
  std::optional<Calibration> calibration;
  std::vector<dsp::BandPowers> powers;
  std::vector<WindowEntry> windows;
  std::vector<std::string> warnings;
};

struct VideoPart {
  double duration = 0.0;
  std::vector<FrameEntry> frames;
  std::vector<double> frame_times;
  io::BlinkTrace trace;
  bool from_frames = false;
  std::vector<std::string> warnings;
};

io::EegRecord load_eeg(const std::string& path, const RunConfig& config, const io::WarningSink& warn) {
  const std::string text = io::read_file(path);
  return with_path(path, [&] {
    io::CsvOptions opts;
    opts.sample_rate = config.sample_rate;
    opts.on_warning = warn;
    io::EegRecord record = io::parse_eeg_csv(text, opts);
    io::require_feature_channels(record);
    return record;
  });
}

std::vector<features::FeatureVector> record_features(const io::EegRecord& record, const std::string& path,
                                                     const RunConfig& config,
                                                     std::vector<dsp::BandPowers>* powers_out) {
  auto powers = with_path(path, [&] {
    return dsp::segment_windows(record, window_plan(config), spectral_options(config), exec_of(config));
  });
  std::vector<features::FeatureVector> feats;
  feats.reserve(powers.size());
  for (const auto& p : powers) feats.push_back(with_path(path, [&] { return features::extract_features(p, feature_options(config)); }));
  feats = features::smooth(feats, config.smoothing);
  if (powers_out) *powers_out = std::move(powers);
  return feats;
}

EegPart run_eeg(const RunInputs& inputs, const RunConfig& config) {
  EegPart part;
  auto warn = [&](std::string_view msg) { part.warnings.push_back(inputs.eeg + ": " + std::string(msg)); };
  const io::EegRecord record = load_eeg(inputs.eeg, config, warn);
  part.duration = record.duration();
  const auto feats = record_features(record, inputs.eeg, config, &part.powers);

  if (!config.calibration.empty()) {
    const std::string text = io::read_file(config.calibration);
    part.calibration = with_path(config.calibration, [&] { return calibration_from_json(text); });
  } else if (config.calibrate) {
    part.calibration = with_path(inputs.eeg, [&] {
      return fcm::calibrate_universes(feats, fcm_config(config), exec_of(config), warn);
    });
  }

  const fuzzy::FuzzySystem system = fuzzy::build_default_system(part.calibration.value_or(Calibration{}));
  part.windows.reserve(feats.size());
  for (const auto& f : feats) {
    WindowEntry w;
    w.start = f.window_start;
    w.features = f;
    w.inference = fuzzy::infer_mamdani(system, f);
    w.eeg_level = fuzzy::classify_eeg_level(w.inference.winning_term);
    if (w.inference.no_rule_fired) warn("no rule fired for window at " + detail::format_double(w.start) + " s");
    part.windows.push_back(std::move(w));
  }
  return part;
}

VideoPart run_video(const RunInputs& inputs, const RunConfig& config) {
  VideoPart part;
  if (!inputs.blink.empty()) {
    const std::string text = io::read_file(inputs.blink);
    part.trace = with_path(inputs.blink, [&] { return io::parse_blink_trace(text); });
    part.duration = part.trace.duration;
    return part;
  }

  part.from_frames = true;
  const auto paths = vision::list_frames(inputs.frames);
  if (paths.empty()) throw Error(Errc::EmptyInput, inputs.frames + ": no .pgm or .png frames");
  const auto face = with_path(config.face_cascade, [&] { return vision::load_cascade(config.face_cascade); });
  const auto eye = with_path(config.eye_cascade, [&] { return vision::load_cascade(config.eye_cascade); });
  const auto analyses =
      vision::analyze_frames(paths, face, eye, face_params(config), eye_params(config), exec_of(config));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    part.frames.push_back({std::filesystem::path(paths[i]).filename().string(), analyses[i]});
    part.frame_times.push_back(static_cast<double>(i) / config.fps);
    if (!analyses[i].face) part.warnings.push_back(paths[i] + ": no face found, eyes counted closed");
  }
  part.duration = static_cast<double>(paths.size()) / config.fps;
  return part;
}

}  // namespace

RunConfig parse_config_json(std::string_view text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for_each_field(base, [&](const char* name, auto& field) {
      if (key == name) {
        read_into(value, key, field);
        known = true;
      }
    });
    if (!known) throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
  }
  return base;
}

std::string config_to_json(const RunConfig& config) { return config_json(config).dump(2) + "\n"; }

void validate(const RunConfig& c, bool needs_cascades) {
  require(!c.sample_rate || *c.sample_rate > 0.0, "sample_rate must be positive");
  try {
    dsp::validate(window_plan(c));
  } catch (const Error& e) {
    throw Error(Errc::InvalidConfig, e.detail());
  }
  require(c.eps > 0.0, "eps must be positive");
  require(c.smoothing > 0.0 && c.smoothing <= 1.0, "smoothing must lie in (0, 1]");
  require(c.calibration.empty() || !c.calibrate, "calibration and calibrate are mutually exclusive");
  require(c.fcm_m > 1.0, "fcm_m must exceed 1");
  require(c.fcm_tol > 0.0, "fcm_tol must be positive");
  require(c.fcm_max_iter >= 1, "fcm_max_iter must be at least 1");
  require(c.fps > 0.0, "fps must be positive");
  require(c.t_alert > 0.0, "t_alert must be positive");
  require(c.perclos_window > 0.0, "perclos_window must be positive");
  require(c.release_hold >= 0.0, "release_hold must be non-negative");
  require(!c.duration_tolerance || *c.duration_tolerance >= 0.0, "duration_tolerance must be non-negative");
  require(c.threads >= 0, "threads must be non-negative");
  vision::validate(face_params(c));
  vision::validate(eye_params(c));
  if (!c.calibration.empty()) require_file(c.calibration, "calibration file");
  if (needs_cascades) {
    require(!c.face_cascade.empty(), "frame input needs a face cascade");
    require(!c.eye_cascade.empty(), "frame input needs an eye cascade");
    require_file(c.face_cascade, "face cascade");
    require_file(c.eye_cascade, "eye cascade");
  }
}

dsp::WindowPlan window_plan(const RunConfig& c) { return {c.window_len, c.hop}; }

dsp::SpectralOptions spectral_options(const RunConfig& c) { return {c.detrend, c.hann}; }

features::FeatureOptions feature_options(const RunConfig& c) { return {c.eps, c.invert_arousal}; }

fcm::FcmConfig fcm_config(const RunConfig& c) {
  fcm::FcmConfig f;
  f.c = 3;
  f.m = c.fcm_m;
  f.tol = c.fcm_tol;
  f.max_iter = static_cast<std::size_t>(c.fcm_max_iter);
  f.seed = c.fcm_seed;
  f.zscore = c.fcm_zscore;
  return f;
}

vision::DetectParams face_params(const RunConfig& c) {
  vision::DetectParams p;
  p.scale_factor = c.scale_factor;
  p.step = c.step;
  p.min_neighbors = c.min_neighbors;
  p.min_stddev = c.min_stddev;
  p.min_size = c.face_min_size;
  return p;
}

vision::DetectParams eye_params(const RunConfig& c) {
  vision::DetectParams p = face_params(c);
  p.min_size = c.eye_min_size;
  return p;
}

Exec exec_of(const RunConfig& c) { return c.parallel ? Exec::Parallel : Exec::Serial; }

std::size_t RunReport::onset_count() const {
  std::size_t n = 0;
  for (const auto& e : alert_events) n += e.transition == fusion::Transition::Onset;
  return n;
}

std::vector<double> tick_times(double duration, double fps) {
  std::vector<double> out;
  if (!(duration >= 0.0) || !(fps > 0.0)) return out;
  const auto n = static_cast<std::size_t>(std::floor(duration * fps + 1e-9));
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) / fps);
  return out;
}

int window_at(const std::vector<WindowEntry>& windows, double t) {
  int idx = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].start <= t) idx = static_cast<int>(i);
  }
  return idx;
}

RunReport run(const RunInputs& inputs, const RunConfig& config, const RunHooks& hooks) {
  if (inputs.blink.empty() == inputs.frames.empty()) {
    throw Error(Errc::InvalidConfig, "exactly one of a blink trace or a frame directory is required");
  }
  validate(config, !inputs.frames.empty());
  if (config.threads > 0) set_max_threads(config.threads);

  EegPart eeg;
  VideoPart video;
  if (config.parallel) {
    auto eeg_future = std::async(std::launch::async, [&] { return run_eeg(inputs, config); });
    auto video_future = std::async(std::launch::async, [&] { return run_video(inputs, config); });
    // Collect both before rethrowing so neither task outlives this frame.
    std::exception_ptr failure;
    try {
      eeg = eeg_future.get();
    } catch (...) {
      failure = std::current_exception();
    }
    try {
      video = video_future.get();
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    eeg = run_eeg(inputs, config);
    video = run_video(inputs, config);
  }

  const double tolerance = config.duration_tolerance.value_or(config.window_len);
  if (std::abs(eeg.duration - video.duration) > tolerance) {
    throw Error(Errc::DurationMismatch, "EEG lasts " + detail::format_double(eeg.duration) + " s but video lasts " +
                                            detail::format_double(video.duration) + " s (tolerance " +
                                            detail::format_double(tolerance) + " s)");
  }

  RunReport report;
  report.config = config;
  report.inputs = inputs;
  report.eeg_duration = eeg.duration;
  report.video_duration = video.duration;
  report.calibration = std::move(eeg.calibration);
  report.powers = std::move(eeg.powers);
  report.windows = std::move(eeg.windows);
  report.frames = std::move(video.frames);
  report.warnings = std::move(eeg.warnings);
  report.warnings.insert(report.warnings.end(), video.warnings.begin(), video.warnings.end());

  const double horizon = std::min(eeg.duration, video.duration) + 1e-9;
  std::vector<double> times = video.from_frames ? video.frame_times : tick_times(video.duration, config.fps);
  std::erase_if(times, [&](double t) { return t > horizon; });

  vision::ClosureTracker tracker(config.t_alert, config.perclos_window);
  fusion::AlertMachine machine(fusion::AlertConfig{config.release_hold});
  report.ticks.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (hooks.before_tick) hooks.before_tick(t);
    TickEntry tick;
    tick.t = t;
    tick.state = video.from_frames ? report.frames[i].analysis.state : video.trace.state_at(t);
    const auto update = tracker.update(t, tick.state);
    tick.closure = update.closure_seconds;
    tick.perclos = update.perclos;
    tick.video_level = update.video_level;
    tick.window = window_at(report.windows, t);
    tick.eeg_level = report.windows[static_cast<std::size_t>(tick.window)].eeg_level;
    tick.fused = fusion::fuse_levels(tick.eeg_level, tick.video_level);
    if (auto event = machine.step(t, tick.fused); event && hooks.on_event) hooks.on_event(*event);
    report.ticks.push_back(tick);
  }
  report.alert_events = machine.events();
  return report;
}

std::string report_to_json(const RunReport& r, const ReportMeta& meta) {
  ordered_json j;
  j["config"] = config_json(r.config);

  ordered_json in;
  in["eeg"] = r.inputs.eeg;
  in["blink"] = r.inputs.blink.empty() ? ordered_json(nullptr) : ordered_json(r.inputs.blink);
  in["frames"] = r.inputs.frames.empty() ? ordered_json(nullptr) : ordered_json(r.inputs.frames);
  in["eeg_duration"] = r.eeg_duration;
  in["video_duration"] = r.video_duration;
  j["inputs"] = in;

  j["calibration"] = r.calibration ? ordered_json::parse(calibration_to_json(*r.calibration)) : ordered_json(nullptr);

  ordered_json windows = ordered_json::array();
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    const auto& w = r.windows[i];
    ordered_json e;
    e["start"] = w.start;
    ordered_json powers;
    for (const auto& [label, p] : r.powers[i].channels) {
      powers[label] = {{"theta", p.theta}, {"alpha", p.alpha}, {"beta", p.beta}};
    }
    e["powers"] = powers;
    e["arousal"] = w.features.arousal;
    e["valence"] = w.features.valence;
    e["dominance"] = w.features.dominance;
    e["activations"] = w.inference.activations;
    e["crisp"] = w.inference.crisp;
    e["term"] = fuzzy::to_string(w.inference.winning_term);
    e["no_rule_fired"] = w.inference.no_rule_fired;
    e["eeg_level"] = to_int(w.eeg_level);
    windows.push_back(e);
  }
  j["windows"] = windows;

  ordered_json frames = ordered_json::array();
  for (const auto& f : r.frames) {
    ordered_json e;
    e["file"] = f.file;
    e["state"] = io::to_string(f.analysis.state);
    if (f.analysis.face) {
      const auto& d = *f.analysis.face;
      e["face"] = {d.x, d.y, d.w, d.h};
    } else {
      e["face"] = nullptr;
    }
    frames.push_back(e);
  }
  j["frames"] = frames;

  ordered_json ticks = ordered_json::array();
  for (const auto& t : r.ticks) {
    ordered_json e;
    e["t"] = t.t;
    e["state"] = io::to_string(t.state);
    e["closure"] = t.closure;
    e["perclos"] = t.perclos;
    e["video_level"] = to_int(t.video_level);
    e["window"] = t.window;
    e["eeg_level"] = to_int(t.eeg_level);
    e["fused"] = to_int(t.fused);
    ticks.push_back(e);
  }
  j["ticks"] = ticks;

  ordered_json events = ordered_json::array();
  for (const auto& ev : r.alert_events) {
    events.push_back({{"timestamp", ev.timestamp}, {"level", to_int(ev.level)},
                      {"transition", fusion::to_string(ev.transition)}});
  }
  j["alert_events"] = events;

  int max_fused = 0;
  for (const auto& t : r.ticks) max_fused = std::max(max_fused, to_int(t.fused));
  j["summary"] = {{"windows", r.windows.size()}, {"ticks", r.ticks.size()},
                  {"max_fused", max_fused}, {"onsets", r.onset_count()}};
  j["warnings"] = r.warnings;
  j["run"] = {{"mode", meta.mode}, {"generated_at", meta.generated_at}, {"version", kVersion}};
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<features::FeatureVector> collect_features(const std::vector<std::string>& eeg_paths,
                                                      const RunConfig& config, const io::WarningSink& on_warning) {
  std::vector<features::FeatureVector> all;
  for (const auto& path : eeg_paths) {
    io::WarningSink warn;
    if (on_warning) warn = [&](std::string_view msg) { on_warning(path + ": " + std::string(msg)); };
    const auto record = load_eeg(path, config, warn);
    const auto feats = record_features(record, path, config, nullptr);
    all.insert(all.end(), feats.begin(), feats.end());
  }
  return all;
}

io::BlinkTrace detect_trace(const std::string& frames_dir, const RunConfig& config) {
  validate(config, true);
  if (config.threads > 0) set_max_threads(config.threads);
  const auto paths = vision::list_frames(frames_dir);
  if (paths.empty()) throw Error(Errc::EmptyInput, frames_dir + ": no .pgm or .png frames");
  const auto face = with_path(config.face_cascade, [&] { return vision::load_cascade(config.face_cascade); });
  const auto eye = with_path(config.eye_cascade, [&] { return vision::load_cascade(config.eye_cascade); });
  const auto analyses =
      vision::analyze_frames(paths, face, eye, face_params(config), eye_params(config), exec_of(config));
  std::vector<io::EyeState> states;
  states.reserve(analyses.size());
  for (const auto& a : analyses) states.push_back(a.state);
  return io::trace_from_frames(states, config.fps);
}

}  // namespace vigil::pipeline
