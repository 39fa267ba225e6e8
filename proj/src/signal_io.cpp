#include "vigil/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "text.hpp"
#include "vigil/error.hpp"

namespace vigil::io {

using detail::format_double;
using detail::parse_double;
using detail::trim;

std::optional<std::string_view> canonical_channel(std::string_view label) {
  const auto upper = detail::to_upper(trim(label));
  for (const auto name : kCanonicalChannels) {
    if (upper == name) return name;
  }
  return std::nullopt;
}

const Channel* EegRecord::find(std::string_view label) const {
  for (const auto& ch : channels) {
    if (ch.label == label) return &ch;
  }
  return nullptr;
}

void validate(const EegRecord& record) {
  if (!(record.sample_rate > 0.0) || !std::isfinite(record.sample_rate)) {
    throw Error(Errc::InvalidSpec, "sample rate must be positive, got " + format_double(record.sample_rate));
  }
  std::set<std::string> seen;
  for (const auto& ch : record.channels) {
    if (!seen.insert(ch.label).second) throw Error(Errc::InvalidSpec, "duplicate channel label " + ch.label);
    if (ch.samples.size() != record.n_samples()) {
      throw Error(Errc::InvalidSpec, "channel " + ch.label + " length differs from " + record.channels.front().label);
    }
  }
}

void require_feature_channels(const EegRecord& record) {
  for (const auto name : kFeatureChannels) {
    if (record.find(name) == nullptr) {
      throw Error(Errc::MissingChannel, "record lacks electrode " + std::string(name));
    }
  }
}

namespace {

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Parses "#key=value" comment lines; returns false for anything else.
bool parse_comment(std::string_view line, std::string& key, std::string_view& value) {
  line = trim(line);
  if (line.empty() || line.front() != '#') return false;
  line.remove_prefix(1);
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    key.clear();
    return true;
  }
  key = detail::to_lower(trim(line.substr(0, eq)));
  value = trim(line.substr(eq + 1));
  return true;
}

}  // namespace

EegRecord parse_eeg_csv(std::string_view text, const CsvOptions& options) {
  if (trim(text).empty()) throw Error(Errc::EmptyFile, "EEG CSV is empty");

  EegRecord record;
  std::optional<double> file_rate;
  std::vector<int> column_to_channel;  // -1 = skipped column
  bool have_header = false;
  std::size_t n_columns = 0;
  std::size_t data_row = 0;

  for (const auto raw : detail::lines(text)) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    std::string key;
    std::string_view value;
    if (parse_comment(line, key, value)) {
      if (key == "sample_rate" || key == "start_time") {
        const auto v = parse_double(value);
        if (!v) throw Error(Errc::MalformedHeader, "unparseable #" + key + " value '" + std::string(value) + "'");
        if (key == "sample_rate") {
          file_rate = *v;
        } else {
          record.start_time = *v;
        }
      }
      continue;
    }

    const auto fields = detail::split(line, ',');
    if (!have_header) {
      have_header = true;
      n_columns = fields.size();
      std::set<std::string_view> seen;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const auto label = unquote(fields[c]);
        const auto canon = canonical_channel(label);
        if (!canon) {
          if (options.on_warning) options.on_warning("skipping non-electrode column '" + std::string(label) + "'");
          column_to_channel.push_back(-1);
          continue;
        }
        if (!seen.insert(*canon).second) {
          throw Error(Errc::MalformedHeader, "duplicate channel label " + std::string(*canon));
        }
        column_to_channel.push_back(static_cast<int>(record.channels.size()));
        record.channels.push_back(Channel{std::string(*canon), {}});
      }
      if (record.channels.empty()) throw Error(Errc::MalformedHeader, "header names no recognizable electrode");
      continue;
    }

    ++data_row;
    if (fields.size() != n_columns) {
      throw Error(Errc::RaggedRows, "row " + std::to_string(data_row) + " has " + std::to_string(fields.size()) +
                                        " fields, header has " + std::to_string(n_columns));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const int ch = column_to_channel[c];
      if (ch < 0) continue;
      const auto v = parse_double(fields[c]);
      if (!v) {
        throw Error(Errc::NonNumericSample, "row " + std::to_string(data_row) + " col " + std::to_string(c + 1) +
                                                ": '" + std::string(trim(fields[c])) + "'");
      }
      record.channels[static_cast<std::size_t>(ch)].samples.push_back(*v);
    }
  }

  if (!have_header) throw Error(Errc::EmptyFile, "EEG CSV holds only comments");
  record.sample_rate = options.sample_rate.value_or(file_rate.value_or(kDefaultSampleRate));
  validate(record);
  return record;
}

std::string write_eeg_csv(const EegRecord& record) {
  validate(record);
  std::string out;
  out += "#sample_rate=" + format_double(record.sample_rate) + "\n";
  out += "#start_time=" + format_double(record.start_time) + "\n";
  for (std::size_t c = 0; c < record.channels.size(); ++c) {
    if (c) out += ',';
    out += record.channels[c].label;
  }
  out += '\n';
  for (std::size_t i = 0; i < record.n_samples(); ++i) {
    for (std::size_t c = 0; c < record.channels.size(); ++c) {
      if (c) out += ',';
      out += format_double(record.channels[c].samples[i]);
    }
    out += '\n';
  }
  return out;
}

std::string_view to_string(EyeState state) { return state == EyeState::Open ? "open" : "closed"; }

EyeState BlinkTrace::state_at(double t) const {
  if (events.empty()) return EyeState::Open;
  const auto it = std::upper_bound(events.begin(), events.end(), t,
                                   [](double v, const BlinkEvent& e) { return v < e.timestamp; });
  if (it == events.begin()) return events.front().state;
  return std::prev(it)->state;
}

BlinkTrace parse_blink_trace(std::string_view text) {
  if (trim(text).empty()) throw Error(Errc::EmptyFile, "blink trace is empty");

  BlinkTrace trace;
  std::optional<double> duration;
  std::size_t line_no = 0;
  for (const auto raw : detail::lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    std::string key;
    std::string_view value;
    if (parse_comment(line, key, value)) {
      if (key == "duration") {
        duration = parse_double(value);
        if (!duration) throw Error(Errc::InvalidDuration, "unparseable #duration value '" + std::string(value) + "'");
      }
      continue;
    }
    const auto fields = detail::split(line, ',');
    const auto where = "line " + std::to_string(line_no);
    if (fields.size() != 2) throw Error(Errc::RaggedRows, where + ": expected 'timestamp,state'");
    const auto t = parse_double(fields[0]);
    if (!t || !std::isfinite(*t)) throw Error(Errc::NonNumericSample, where + ": bad timestamp '" + std::string(trim(fields[0])) + "'");
    const auto state_text = detail::to_lower(trim(fields[1]));
    EyeState state;
    if (state_text == "open") {
      state = EyeState::Open;
    } else if (state_text == "closed") {
      state = EyeState::Closed;
    } else {
      throw Error(Errc::UnknownState, where + ": unknown eye state '" + std::string(trim(fields[1])) + "'");
    }

    if (trace.events.empty()) {
      if (*t < 0.0) throw Error(Errc::NonMonotonicTimestamps, where + ": first timestamp is negative");
    } else {
      const auto& prev = trace.events.back();
      if (!(*t > prev.timestamp)) {
        throw Error(Errc::NonMonotonicTimestamps, where + ": timestamp " + format_double(*t) +
                                                      " does not exceed " + format_double(prev.timestamp));
      }
      if (prev.state == state) {
        throw Error(Errc::RepeatedState, where + ": state '" + state_text + "' repeats the previous event");
      }
    }
    trace.events.push_back({*t, state});
  }

  if (trace.events.empty()) throw Error(Errc::EmptyFile, "blink trace has no events");
  const double last = trace.events.back().timestamp;
  trace.duration = duration.value_or(last);
  if (!(trace.duration >= last)) {
    throw Error(Errc::InvalidDuration, "duration " + format_double(trace.duration) + " precedes last event at " +
                                           format_double(last));
  }
  return trace;
}

std::string write_blink_trace(const BlinkTrace& trace) {
  std::string out;
  for (const auto& e : trace.events) {
    out += format_double(e.timestamp);
    out += ',';
    out += to_string(e.state);
    out += '\n';
  }
  out += "#duration=" + format_double(trace.duration) + "\n";
  return out;
}

BlinkTrace trace_from_frames(std::span<const EyeState> states, double fps) {
  if (states.empty()) throw Error(Errc::EmptyInput, "no frames");
  if (!(fps > 0.0)) throw Error(Errc::InvalidConfig, "frame rate must be positive");
  BlinkTrace trace;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (trace.events.empty() || trace.events.back().state != states[i]) {
      trace.events.push_back({static_cast<double>(i) / fps, states[i]});
    }
  }
  trace.duration = static_cast<double>(states.size()) / fps;
  return trace;
}

EegRecord generate_synthetic_eeg(const SynthSpec& spec, std::uint64_t seed) {
  if (!(spec.duration > 0.0)) throw Error(Errc::InvalidSpec, "duration must be positive");
  if (!(spec.sample_rate > 0.0)) throw Error(Errc::InvalidSpec, "sample rate must be positive");
  if (!(spec.noise_std >= 0.0)) throw Error(Errc::InvalidSpec, "noise_std must be non-negative");
  const double nyquist = spec.sample_rate / 2.0;
  for (const auto& comp : spec.components) {
    if (comp.frequency < 0.0) throw Error(Errc::InvalidSpec, "negative frequency on " + comp.channel);
    if (comp.frequency >= nyquist) {
      throw Error(Errc::AliasedComponent, format_double(comp.frequency) + " Hz on " + comp.channel +
                                              " is at or above Nyquist " + format_double(nyquist) + " Hz");
    }
  }

  EegRecord record;
  record.sample_rate = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
  for (const auto name : kCanonicalChannels) record.channels.push_back({std::string(name), {}});
  for (const auto& comp : spec.components) {
    const auto canon = canonical_channel(comp.channel);
    const std::string label = canon ? std::string(*canon) : comp.channel;
    if (record.find(label) == nullptr) record.channels.push_back({label, {}});
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (auto& ch : record.channels) {
    ch.samples.assign(n, 0.0);
    for (const auto& comp : spec.components) {
      const auto canon = canonical_channel(comp.channel);
      if ((canon ? std::string(*canon) : comp.channel) != ch.label) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate;
        ch.samples[i] += comp.amplitude * std::sin(two_pi * comp.frequency * t + comp.phase);
      }
    }
    if (spec.noise_std > 0.0) {
      for (auto& s : ch.samples) s += spec.noise_std * gauss(rng);
    }
  }
  return record;
}

SynthSpec parse_synth_spec_json(std::string_view text) {
  SynthSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    spec.duration = doc.value("duration", spec.duration);
    spec.sample_rate = doc.value("sample_rate", spec.sample_rate);
    spec.noise_std = doc.value("noise_std", spec.noise_std);
    if (doc.contains("components")) {
      for (const auto& c : doc.at("components")) {
        SynthComponent comp;
        comp.channel = c.at("channel").get<std::string>();
        comp.frequency = c.at("frequency").get<double>();
        comp.amplitude = c.value("amplitude", 1.0);
        comp.phase = c.value("phase", 0.0);
        spec.components.push_back(std::move(comp));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidSpec, std::string("synthetic spec JSON: ") + e.what());
  }
  return spec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path);
}

}  // namespace vigil::io
