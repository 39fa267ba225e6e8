#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/level.hpp"

namespace vigil::fusion {

// Combines the EEG and video levels. The five printed rules fix eight of the
// nine combinations; (1, 0) is completed by the same max rule, so the whole
// table is max(eeg, video).
Level fuse_levels(Level eeg, Level video);

// Integer front door; throws Error(OutOfDomainLevel) outside {0, 1, 2}.
Level fuse_levels(int eeg, int video);

enum class AlertStatus { Quiet, Alerting };

enum class Transition { Onset, Release };

std::string_view to_string(Transition t);

struct AlertEvent {
  double timestamp = 0.0;
  Level level = Level::Alert;
  Transition transition = Transition::Onset;

  bool operator==(const AlertEvent&) const = default;
};

struct AlertConfig {
  double release_hold = 5.0;  // seconds below level 2 before an alert clears
};

// Alert state machine: switches to ALERTING the moment the fused level hits 2
// and back to QUIET once the level has stayed below 2 for `release_hold`
// seconds. Every transition is logged.
class AlertMachine {
 public:
  explicit AlertMachine(AlertConfig config = {});

  // Throws Error(TimestampRegression) when time runs backwards.
  std::optional<AlertEvent> step(double timestamp, Level level);

  AlertStatus status() const { return status_; }
  double since() const { return since_; }
  const std::vector<AlertEvent>& events() const { return events_; }

 private:
  AlertConfig config_;
  AlertStatus status_ = AlertStatus::Quiet;
  double since_ = 0.0;
  std::optional<double> last_timestamp_;
  std::optional<double> below_since_;
  std::vector<AlertEvent> events_;
};

// One JSON object per line: {"level":..,"timestamp":..,"transition":..}.
std::string to_json_line(const AlertEvent& event);

}  // namespace vigil::fusion
