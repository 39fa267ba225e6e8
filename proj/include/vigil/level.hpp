#pragma once

#include <cstdint>

namespace vigil {

// Three-step severity scale shared by the EEG level, the video level and the
// fused drowsiness level.
enum class Level : std::uint8_t { Alert = 0, Moderate = 1, Drowsy = 2 };

// Throws Error(OutOfDomainLevel) outside {0, 1, 2}.
Level level_from_int(int value);

constexpr int to_int(Level level) { return static_cast<int>(level); }

}  // namespace vigil
