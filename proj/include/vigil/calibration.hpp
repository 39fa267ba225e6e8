#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

namespace vigil {

// Data-derived layout for one linguistic variable: universe bounds and the
// peaks of its Small / Medium / Large terms (ascending).
struct VariableCalibration {
  double lo = 0.0;
  double hi = 1.0;
  std::array<double, 3> peaks{};

  bool operator==(const VariableCalibration&) const = default;
};

// Keyed by input variable name ("arousal", "valence", "dominance"). Variables
// absent from the map keep their default layout.
using Calibration = std::map<std::string, VariableCalibration, std::less<>>;

// {"arousal": {"lo": .., "hi": .., "peaks": [s, m, l]}, ...}
std::string calibration_to_json(const Calibration& calibration);

// Throws Error(BadCalibration) on schema violations.
Calibration calibration_from_json(std::string_view text);

}  // namespace vigil
