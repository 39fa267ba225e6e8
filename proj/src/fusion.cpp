#include "vigil/fusion.hpp"

#include <algorithm>

#include <json.hpp>

#include "text.hpp"
#include "vigil/error.hpp"

namespace vigil {

Level level_from_int(int value) {
  if (value < 0 || value > 2) throw Error(Errc::OutOfDomainLevel, "level " + std::to_string(value) + " not in {0,1,2}");
  return static_cast<Level>(value);
}

}  // namespace vigil

namespace vigil::fusion {

Level fuse_levels(Level eeg, Level video) {
  const int e = to_int(eeg);
  const int v = to_int(video);
  if (e == 2 || v == 2) return Level::Drowsy;      // rule 1
  if (e == 1 && v == 2) return Level::Drowsy;      // rule 2 (subsumed by rule 1)
  if (e == 1 && v == 1) return Level::Moderate;    // rule 3
  if (e == 0 && v == 1) return Level::Moderate;    // rule 4
  if (e == 0 && v == 0) return Level::Alert;       // rule 5
  return std::max(eeg, video);                     // (1, 0): max completion
}

Level fuse_levels(int eeg, int video) { return fuse_levels(level_from_int(eeg), level_from_int(video)); }

std::string_view to_string(Transition t) { return t == Transition::Onset ? "onset" : "release"; }

AlertMachine::AlertMachine(AlertConfig config) : config_(config) {
  if (!(config_.release_hold >= 0.0)) throw Error(Errc::InvalidConfig, "release hold must be non-negative");
}

std::optional<AlertEvent> AlertMachine::step(double timestamp, Level level) {
  if (last_timestamp_ && timestamp < *last_timestamp_) {
    throw Error(Errc::TimestampRegression, "alert step at " + detail::format_double(timestamp) + " precedes " +
                                               detail::format_double(*last_timestamp_));
  }
  last_timestamp_ = timestamp;

  std::optional<AlertEvent> event;
  if (level == Level::Drowsy) {
    below_since_.reset();
    if (status_ == AlertStatus::Quiet) {
      status_ = AlertStatus::Alerting;
      since_ = timestamp;
      event = AlertEvent{timestamp, level, Transition::Onset};
    }
  } else if (status_ == AlertStatus::Alerting) {
    if (!below_since_) below_since_ = timestamp;
    if (timestamp - *below_since_ >= config_.release_hold) {
      status_ = AlertStatus::Quiet;
      since_ = timestamp;
      below_since_.reset();
      event = AlertEvent{timestamp, level, Transition::Release};
    }
  }
  if (event) events_.push_back(*event);
  return event;
}

std::string to_json_line(const AlertEvent& event) {
  const nlohmann::json j = {
      {"timestamp", event.timestamp}, {"level", to_int(event.level)}, {"transition", to_string(event.transition)}};
  return j.dump();
}

}  // namespace vigil::fusion
