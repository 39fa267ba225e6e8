#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vigil::io {

// Emotiv EPOC electrode set in 10-20 naming.
inline constexpr std::array<std::string_view, 14> kCanonicalChannels = {
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4"};

// Electrodes read by the arousal/valence/dominance ratios.
inline constexpr std::array<std::string_view, 7> kFeatureChannels = {
    "AF3", "AF4", "F3", "F4", "FC6", "F8", "P8"};

inline constexpr double kDefaultSampleRate = 128.0;

// Returns the canonical spelling of a channel label, or nullopt if the label
// is not one of the 14 headset electrodes. Matching is case-insensitive.
std::optional<std::string_view> canonical_channel(std::string_view label);

struct Channel {
  std::string label;
  std::vector<double> samples;  // microvolts

  bool operator==(const Channel&) const = default;
};

struct EegRecord {
  std::vector<Channel> channels;
  double sample_rate = kDefaultSampleRate;
  double start_time = 0.0;

  std::size_t n_samples() const { return channels.empty() ? 0 : channels.front().samples.size(); }
  double duration() const { return static_cast<double>(n_samples()) / sample_rate; }

  // nullptr when the label is absent.
  const Channel* find(std::string_view label) const;

  bool operator==(const EegRecord&) const = default;
};

// Throws Error(InvalidSpec) when the record breaks an invariant
// (ragged channels, duplicate labels, non-positive sample rate).
void validate(const EegRecord& record);

// Throws Error(MissingChannel) naming the first absent feature electrode.
void require_feature_channels(const EegRecord& record);

using WarningSink = std::function<void(std::string_view)>;

struct CsvOptions {
  std::optional<double> sample_rate;  // overrides the file's #sample_rate= line
  WarningSink on_warning;             // receives skipped-column notices
};

EegRecord parse_eeg_csv(std::string_view text, const CsvOptions& options = {});

// Canonical writer: `#sample_rate=` and `#start_time=` comments, a label
// header, then one row per sample using shortest round-trip formatting.
std::string write_eeg_csv(const EegRecord& record);

enum class EyeState : std::uint8_t { Open, Closed };

std::string_view to_string(EyeState state);

struct BlinkEvent {
  double timestamp = 0.0;
  EyeState state = EyeState::Open;

  bool operator==(const BlinkEvent&) const = default;
};

struct BlinkTrace {
  std::vector<BlinkEvent> events;
  double duration = 0.0;

  // State in force at time t: the latest event at or before t. Before the first
  // event the first event's state is assumed.
  EyeState state_at(double t) const;

  bool operator==(const BlinkTrace&) const = default;
};

BlinkTrace parse_blink_trace(std::string_view text);
std::string write_blink_trace(const BlinkTrace& trace);

// Builds a trace from per-frame states sampled at t_i = i / fps, keeping only
// the state changes.
BlinkTrace trace_from_frames(std::span<const EyeState> states, double fps);

struct SynthComponent {
  std::string channel;
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // microvolts
  double phase = 0.0;      // radians
};

struct SynthSpec {
  std::vector<SynthComponent> components;
  double noise_std = 0.0;
  double duration = 20.0;
  double sample_rate = kDefaultSampleRate;
};

// Every canonical channel is emitted (pure noise unless a component names it);
// components on non-canonical labels add extra channels after the canonical set.
EegRecord generate_synthetic_eeg(const SynthSpec& spec, std::uint64_t seed);

SynthSpec parse_synth_spec_json(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace vigil::io
