#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vigil/signal_io.hpp"

namespace testing {

inline std::string data_path(const std::string& rel) { return std::string(VIGIL_DATA_DIR) + "/" + rel; }

inline std::string face_cascade() { return data_path("cascades/haarcascade_frontalface_default.xml"); }
inline std::string eye_cascade() { return data_path("cascades/haarcascade_eye.xml"); }

inline std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::path(VIGIL_SCRATCH_DIR);
  std::filesystem::create_directories(dir);
  return dir;
}

// EEG CSV rendered from a bundled synth spec with seed 7, same bytes as
// `vigil generate --spec data/fixtures/<name>_spec.json --seed 7`.
inline std::string fixture_csv(const std::string& name) {
  const auto path = scratch_dir() / (name + ".csv");
  if (!std::filesystem::exists(path)) {
    const auto spec = vigil::io::parse_synth_spec_json(vigil::io::read_file(data_path("fixtures/" + name + "_spec.json")));
    const auto tmp = scratch_dir() / (name + ".csv.tmp");
    vigil::io::write_file(tmp.string(), vigil::io::write_eeg_csv(vigil::io::generate_synthetic_eeg(spec, 7)));
    std::filesystem::rename(tmp, path);
  }
  return path.string();
}

// O(n^2) DFT with an exact twiddle table.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> tw(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(a), std::sin(a)};
  }
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * tw[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> sinusoid(double freq, double amp, double fs, std::size_t n, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  }
  return x;
}

}  // namespace testing
