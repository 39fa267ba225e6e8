#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "vigil/dsp.hpp"
#include "vigil/error.hpp"

using namespace vigil;
using namespace vigil::dsp;

namespace {

std::vector<double> random_signal(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 5.0);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng) + 2.0;
  return x;
}

double max_rel_error(const Spectrum& s, const std::vector<std::complex<double>>& ref) {
  double peak = 0.0;
  for (const auto& r : ref) peak = std::max(peak, std::abs(r));
  double err = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, std::abs(s.bins[k] - ref[k]));
  return peak > 0.0 ? err / peak : err;
}

io::EegRecord tone_record(double seconds, double freq_af3) {
  io::SynthSpec spec;
  spec.duration = seconds;
  spec.noise_std = 0.5;
  spec.components = {{"AF3", freq_af3, 10.0, 0.0}};
  return io::generate_synthetic_eeg(spec, 4);
}

}  // namespace

TEST_CASE("impulse has a flat spectrum") {
  const std::vector<double> x = {1, 0, 0, 0};
  const auto s = fft_real(x);
  REQUIRE(s.bins.size() == 3);
  for (const auto& b : s.bins) CHECK(std::abs(b) == doctest::Approx(1.0));
}

TEST_CASE("constant puts everything in bin 0") {
  const std::vector<double> x(10, 2.5);
  const auto s = fft_real(x);
  CHECK(s.bins[0].real() == doctest::Approx(25.0));
  for (std::size_t k = 1; k < s.bins.size(); ++k) CHECK(std::abs(s.bins[k]) < 1e-12);
}

TEST_CASE("spectrum shape") {
  const std::vector<double> x(7, 1.0);
  const auto s = fft_real(x, 14.0);
  CHECK(s.bins.size() == 4);
  CHECK(s.bin_width == 2.0);
  CHECK(s.n == 7);
  CHECK_THROWS_AS(fft_real(std::vector<double>{1.0}), Error);
}

TEST_CASE("fft matches the naive DFT on every length 2..128") {
  std::mt19937_64 rng(17);
  for (std::size_t n = 2; n <= 128; ++n) {
    const auto x = random_signal(rng, n);
    CHECK_MESSAGE(max_rel_error(fft_real(x), testing::naive_dft(x)) < 1e-9, "n = " << n);
  }
}

TEST_CASE("random length-64 signal") {
  std::mt19937_64 rng(64);
  const auto x = random_signal(rng, 64);
  const auto s = fft_real(x);
  const auto ref = testing::naive_dft(x);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(s.bins[k] - ref[k]) < 1e-9);
}

TEST_CASE("complex fft inverts via conjugation") {
  std::mt19937_64 rng(8);
  for (std::size_t n : {3u, 16u, 100u, 257u}) {
    std::vector<std::complex<double>> x(n);
    std::normal_distribution<double> d;
    for (auto& v : x) v = {d(rng), d(rng)};
    auto y = fft(x);
    for (auto& v : y) v = std::conj(v);
    auto z = fft(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(std::conj(z[i]) / static_cast<double>(n) - x[i]) < 1e-10);
  }
}

TEST_CASE("Parseval on random lengths 16..4096") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 16 + rng() % (4096 - 16 + 1);
    const auto x = random_signal(rng, n);
    double energy = 0.0;
    for (double v : x) energy += v * v;
    CHECK(std::abs(spectrum_energy(fft_real(x)) - energy) <= 1e-9 * energy);
  }
}

TEST_CASE("band power oracle: 10 Hz unit sinusoid") {
  const auto x = testing::sinusoid(10.0, 1.0, 128.0, 2560);
  CHECK(std::abs(band_power(x, 128.0, kAlpha) - 0.5) <= 1e-6);
  CHECK(band_power(x, 128.0, kTheta) < 1e-9);
  CHECK(band_power(x, 128.0, kBeta) < 1e-9);
}

TEST_CASE("band power oracle: 5 Hz + 20 Hz") {
  auto x = testing::sinusoid(5.0, 1.0, 128.0, 2560);
  const auto y = testing::sinusoid(20.0, 1.0, 128.0, 2560, 0.4);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  CHECK(band_power(x, 128.0, kTheta) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(band_power(x, 128.0, kBeta) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(band_power(x, 128.0, kAlpha) < 1e-9);
}

TEST_CASE("zero signal has zero power") {
  const std::vector<double> x(2560, 0.0);
  for (const auto& b : {kTheta, kAlpha, kBeta, kDelta, kMu, kGamma}) CHECK(band_power(x, 128.0, b) == 0.0);
}

TEST_CASE("13 Hz belongs to beta only") {
  const auto x = testing::sinusoid(13.0, 2.0, 128.0, 2560);
  CHECK(band_power(x, 128.0, kAlpha) < 1e-9);
  CHECK(band_power(x, 128.0, kBeta) == doctest::Approx(2.0));
}

TEST_CASE("detrending removes an electrode offset") {
  auto x = testing::sinusoid(10.0, 1.0, 128.0, 2560);
  for (auto& v : x) v += 4000.0;
  CHECK(band_power(x, 128.0, kAlpha) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(band_power(x, 128.0, kDelta) < 1e-9);
}

TEST_CASE("Hann taper keeps the unit sinusoid near 0.5") {
  const auto x = testing::sinusoid(10.0, 1.0, 128.0, 2560);
  CHECK(band_power(x, 128.0, kAlpha, {.detrend = true, .hann = true}) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("band above Nyquist") {
  const std::vector<double> x(100, 1.0);
  CHECK_THROWS_AS(band_power(x, 50.0, kBeta), Error);
  try {
    band_power(x, 60.0, kBeta);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BandAboveNyquist);
  }
}

TEST_CASE("linearity: scaling by a scales power by a^2") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_signal(rng, 2560);
    const double a = 0.1 + static_cast<double>(rng() % 1000) / 100.0;
    std::vector<double> y(x);
    for (auto& v : y) v *= a;
    for (const auto& b : {kTheta, kAlpha, kBeta}) {
      const double px = band_power(x, 128.0, b);
      CHECK(std::abs(band_power(y, 128.0, b) - a * a * px) <= 1e-9 * a * a * px);
    }
  }
}

TEST_CASE("circular shift leaves band power unchanged") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_signal(rng, 2560);
    std::vector<double> y(x);
    std::rotate(y.begin(), y.begin() + static_cast<long>(rng() % y.size()), y.end());
    for (const auto& b : {kTheta, kAlpha, kBeta}) {
      const double px = band_power(x, 128.0, b);
      CHECK(std::abs(band_power(y, 128.0, b) - px) <= 1e-9 * px);
    }
  }
}

TEST_CASE("window plan arithmetic") {
  CHECK(segment_windows(tone_record(60.0, 10.0)).size() == 3);
  const auto w = segment_windows(tone_record(59.0, 10.0));
  REQUIRE(w.size() == 2);
  CHECK(w[0].window_start == 0.0);
  CHECK(w[1].window_start == 20.0);
  CHECK(segment_windows(tone_record(60.0, 10.0), {20.0, 10.0}).size() == 5);
}

TEST_CASE("window plan errors") {
  const auto rec = tone_record(10.0, 10.0);
  try {
    segment_windows(rec);
    FAIL("expected RecordTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RecordTooShort);
  }
  CHECK_THROWS_AS(validate(WindowPlan{20.0, 30.0}), Error);
  CHECK_THROWS_AS(validate(WindowPlan{20.0, 0.0}), Error);
}

TEST_CASE("10 Hz on AF3 dominates F7 in every window") {
  for (const auto& bp : segment_windows(tone_record(60.0, 10.0))) {
    CHECK(bp.at("AF3").alpha > 100.0 * bp.at("F7").alpha);
  }
}

TEST_CASE("window powers match direct band power") {
  const auto rec = tone_record(40.0, 9.0);
  const auto windows = segment_windows(rec);
  const auto& x = rec.find("AF3")->samples;
  const std::vector<double> second(x.begin() + 2560, x.begin() + 5120);
  CHECK(windows[1].at("AF3").alpha == band_power(second, 128.0, kAlpha));
  CHECK_THROWS_AS(windows[1].at("XX"), Error);
}

TEST_CASE("serial and parallel segmentation agree bit for bit") {
  const auto rec = tone_record(200.0, 11.0);
  CHECK(segment_windows(rec, {20.0, 5.0}, {}, Exec::Serial) == segment_windows(rec, {20.0, 5.0}, {}, Exec::Parallel));
}
