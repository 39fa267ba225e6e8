#pragma once

namespace vigil {

// Selects between the OpenMP kernels and their serial reference loops.
// Both paths produce bit-identical results; the serial path is kept for
// testing and for single-threaded deployments.
enum class Exec { Serial, Parallel };

// Number of worker threads the parallel kernels will use (1 without OpenMP).
int max_threads() noexcept;

// Caps the OpenMP thread count; n <= 0 restores the runtime default.
void set_max_threads(int n) noexcept;

}  // namespace vigil
