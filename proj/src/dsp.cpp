#include <cmath>
#include <numbers>
#include <numeric>

#include "text.hpp"
#include "vigil/dsp.hpp"
#include "vigil/error.hpp"

namespace vigil::dsp {

std::string_view to_string(BandName name) {
  switch (name) {
    case BandName::Delta: return "delta";
    case BandName::Theta: return "theta";
    case BandName::Alpha: return "alpha";
    case BandName::Mu: return "mu";
    case BandName::Beta: return "beta";
    case BandName::Gamma: return "gamma";
  }
  return "?";
}

namespace {

struct Prepared {
  Spectrum spectrum;
  double window_energy;
};

Prepared prepare(std::span<const double> samples, double sample_rate, const SpectralOptions& options) {
  if (samples.size() < 2) throw Error(Errc::TooShort, "band power needs at least 2 samples");
  const std::size_t n = samples.size();
  std::vector<double> x(samples.begin(), samples.end());
  if (options.detrend) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (auto& v : x) v -= mean;
  }
  double energy = static_cast<double>(n);
  if (options.hann) {
    energy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n)));
      x[t] *= w;
      energy += w * w;
    }
  }
  return {fft_real(x, sample_rate), energy};
}

void check_band(const Band& band, double sample_rate) {
  if (!(band.lo >= 0.0) || !(band.lo < band.hi)) {
    throw Error(Errc::InvalidConfig, std::string("band ") + std::string(to_string(band.name)) + " has lo >= hi");
  }
  if (std::isfinite(band.hi) && !(sample_rate > 2.0 * band.hi)) {
    throw Error(Errc::BandAboveNyquist, std::string(to_string(band.name)) + " upper edge " +
                                            detail::format_double(band.hi) + " Hz needs sample rate above " +
                                            detail::format_double(2.0 * band.hi) + " Hz");
  }
}

}  // namespace

double band_power(const Spectrum& spectrum, const Band& band, double window_energy) {
  const std::size_t n = spectrum.n;
  const double fs = spectrum.bin_width * static_cast<double>(n);
  check_band(band, fs);
  // Interior bins only: DC and (for even n) Nyquist are never in a band.
  const std::size_t last_interior = (n % 2 == 0) ? n / 2 - 1 : n / 2;
  const double scale = 2.0 / (static_cast<double>(n) * window_energy);
  double power = 0.0;
  for (std::size_t k = 1; k <= last_interior; ++k) {
    const double f = static_cast<double>(k) * spectrum.bin_width;
    if (f < band.lo) continue;
    if (f >= band.hi) break;
    power += scale * std::norm(spectrum.bins[k]);
  }
  return power;
}

double band_power(std::span<const double> samples, double sample_rate, const Band& band,
                  const SpectralOptions& options) {
  check_band(band, sample_rate);
  const auto prepared = prepare(samples, sample_rate, options);
  return band_power(prepared.spectrum, band, prepared.window_energy);
}

ChannelPowers channel_powers(std::span<const double> samples, double sample_rate, const SpectralOptions& options) {
  for (const auto& b : {kTheta, kAlpha, kBeta}) check_band(b, sample_rate);
  const auto prepared = prepare(samples, sample_rate, options);
  return ChannelPowers{band_power(prepared.spectrum, kTheta, prepared.window_energy),
                       band_power(prepared.spectrum, kAlpha, prepared.window_energy),
                       band_power(prepared.spectrum, kBeta, prepared.window_energy)};
}

const ChannelPowers& BandPowers::at(std::string_view label) const {
  const auto it = channels.find(label);
  if (it == channels.end()) throw Error(Errc::MissingChannel, "no band powers for electrode " + std::string(label));
  return it->second;
}

void validate(const WindowPlan& plan) {
  if (!(plan.hop > 0.0) || !(plan.hop <= plan.window_len)) {
    throw Error(Errc::InvalidPlan, "window plan needs 0 < hop <= window_len (hop " + detail::format_double(plan.hop) +
                                       ", window " + detail::format_double(plan.window_len) + ")");
  }
}

std::vector<BandPowers> segment_windows(const io::EegRecord& record, const WindowPlan& plan,
                                        const SpectralOptions& options, Exec exec) {
  validate(plan);
  io::validate(record);
  const auto win = static_cast<std::size_t>(std::llround(plan.window_len * record.sample_rate));
  const auto hop = static_cast<std::size_t>(std::llround(plan.hop * record.sample_rate));
  const std::size_t n = record.n_samples();
  if (win < 2 || hop == 0) throw Error(Errc::InvalidPlan, "window shorter than two samples at this sample rate");
  if (n < win) {
    throw Error(Errc::RecordTooShort, "record of " + detail::format_double(record.duration()) +
                                          " s is shorter than one " + detail::format_double(plan.window_len) +
                                          " s window");
  }

  const std::size_t n_windows = (n - win) / hop + 1;
  const std::size_t n_channels = record.channels.size();
  std::vector<ChannelPowers> grid(n_windows * n_channels);

  const auto work = [&](std::size_t idx) {
    const std::size_t w = idx / n_channels;
    const std::size_t c = idx % n_channels;
    const std::span<const double> samples(record.channels[c].samples.data() + w * hop, win);
    grid[idx] = channel_powers(samples, record.sample_rate, options);
  };

  const auto total = static_cast<std::ptrdiff_t>(grid.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < total; ++i) work(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < total; ++i) work(static_cast<std::size_t>(i));
  }

  std::vector<BandPowers> out(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    out[w].window_start = static_cast<double>(w * hop) / record.sample_rate;
    for (std::size_t c = 0; c < n_channels; ++c) {
      out[w].channels.emplace(record.channels[c].label, grid[w * n_channels + c]);
    }
  }
  return out;
}

}  // namespace vigil::dsp
