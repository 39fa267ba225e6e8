#pragma once

#include <complex>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/exec.hpp"
#include "vigil/signal_io.hpp"

namespace vigil::dsp {

enum class BandName { Delta, Theta, Alpha, Mu, Beta, Gamma };

std::string_view to_string(BandName name);

// Half-open frequency interval [lo, hi) in Hz.
struct Band {
  BandName name;
  double lo;
  double hi;
};

inline constexpr Band kTheta{BandName::Theta, 4.0, 7.0};
inline constexpr Band kAlpha{BandName::Alpha, 8.0, 13.0};
inline constexpr Band kBeta{BandName::Beta, 13.0, 30.0};

// Rhythms defined alongside the three above but not read by the default
// pipeline. Gamma is open-ended: its upper edge means "up to Nyquist".
inline constexpr Band kDelta{BandName::Delta, 0.0, 4.0};
inline constexpr Band kMu{BandName::Mu, 8.0, 12.0};
inline constexpr Band kGamma{BandName::Gamma, 30.0, std::numeric_limits<double>::infinity()};

// One-sided DFT of a real signal: bins.size() == n/2 + 1, bin_width = fs / n.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  double bin_width = 1.0;
  std::size_t n = 0;
};

// Forward DFT, X_k = sum_t x_t exp(-2 pi i k t / n), any length >= 1.
// Radix-2 for powers of two, Bluestein chirp-z otherwise.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

// Throws Error(TooShort) for fewer than 2 samples.
Spectrum fft_real(std::span<const double> samples, double sample_rate = 1.0);

// Time-domain energy sum |x_t|^2 recovered from a one-sided spectrum.
double spectrum_energy(const Spectrum& spectrum);

struct SpectralOptions {
  bool detrend = true;  // subtract the window mean before the transform
  bool hann = false;    // periodic Hann taper, power renormalized by window energy
};

// Mean-square amplitude carried by the interior bins whose centre frequency
// lies in [band.lo, band.hi). A unit-amplitude sinusoid contributes 0.5.
double band_power(std::span<const double> samples, double sample_rate, const Band& band,
                  const SpectralOptions& options = {});

// Same, from a precomputed (already tapered) spectrum. `window_energy` is
// sum w_t^2 of the taper (n for a rectangular window).
double band_power(const Spectrum& spectrum, const Band& band, double window_energy);

struct ChannelPowers {
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  bool operator==(const ChannelPowers&) const = default;
};

struct BandPowers {
  std::map<std::string, ChannelPowers, std::less<>> channels;  // microvolts^2
  double window_start = 0.0;

  // Throws Error(MissingChannel).
  const ChannelPowers& at(std::string_view label) const;

  bool operator==(const BandPowers&) const = default;
};

ChannelPowers channel_powers(std::span<const double> samples, double sample_rate,
                             const SpectralOptions& options = {});

struct WindowPlan {
  double window_len = 20.0;  // seconds
  double hop = 20.0;         // seconds; hop == window_len means non-overlapping
};

// Throws Error(InvalidPlan) unless 0 < hop <= window_len.
void validate(const WindowPlan& plan);

// Per-window theta/alpha/beta powers for every channel. Windows start at
// 0, hop, 2 hop, ... (relative to the record); a trailing partial window is
// dropped. Throws Error(RecordTooShort) when no full window fits.
std::vector<BandPowers> segment_windows(const io::EegRecord& record, const WindowPlan& plan = {},
                                        const SpectralOptions& options = {}, Exec exec = Exec::Parallel);

}  // namespace vigil::dsp
