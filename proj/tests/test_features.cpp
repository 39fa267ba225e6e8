#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vigil/error.hpp"
#include "vigil/features.hpp"

using namespace vigil;
using namespace vigil::features;

namespace {

dsp::BandPowers uniform_powers(double a, double b) {
  dsp::BandPowers bp;
  for (auto ch : io::kFeatureChannels) bp.channels[std::string(ch)] = {0.0, a, b};
  return bp;
}

// Band power straight from the naive DFT of the mean-removed signal.
double oracle_power(const std::vector<double>& x, double fs, const dsp::Band& band) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> y(x);
  for (auto& v : y) v -= mean;
  const auto bins = testing::naive_dft(y);
  const double n = static_cast<double>(y.size());
  double p = 0.0;
  for (std::size_t k = 1; k < bins.size(); ++k) {
    if (2 * k == y.size()) continue;
    const double f = static_cast<double>(k) * fs / n;
    if (f >= band.lo && f < band.hi) p += 2.0 * std::norm(bins[k]) / (n * n);
  }
  return p;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("equal powers give (1, 0, 3)") {
  const auto f = extract_features(uniform_powers(1.0, 1.0));
  CHECK(f.arousal == 1.0);
  CHECK(f.valence == 0.0);
  CHECK(f.dominance == 3.0);
}

TEST_CASE("valence substitution") {
  auto bp = uniform_powers(1.0, 1.0);
  bp.channels["F4"] = {0.0, 2.0, 1.0};
  CHECK(extract_features(bp).valence == 1.0);
}

TEST_CASE("printed and inverted arousal") {
  auto bp = uniform_powers(1.0, 1.0);
  bp.channels["AF3"] = {0.0, 5.0, 1.0};
  CHECK(extract_features(bp).arousal == 8.0 / 4.0);
  CHECK(extract_features(bp, {.eps = 1e-12, .invert_arousal = true}).arousal == 4.0 / 8.0);
}

TEST_CASE("eps guards zero denominators") {
  const auto f = extract_features(uniform_powers(0.0, 0.0));
  CHECK(f.arousal == 0.0);
  CHECK(f.dominance == 0.0);
  const auto g = extract_features(uniform_powers(1.0, 0.0), {.eps = 0.5});
  CHECK(g.arousal == 4.0 / 0.5);
}

TEST_CASE("missing electrode is named") {
  auto bp = uniform_powers(1.0, 1.0);
  bp.channels.erase("F8");
  try {
    extract_features(bp);
    FAIL("expected MissingChannel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingChannel);
    CHECK(std::string(e.what()).find("F8") != std::string::npos);
  }
}

TEST_CASE("noise-free tones saturate through the eps guard") {
  io::SynthSpec spec;
  for (auto ch : {"AF3", "AF4", "F3", "F4"}) spec.components.push_back({ch, 10.0, 1.0, 0.0});
  for (auto ch : {"FC6", "F8", "P8"}) spec.components.push_back({ch, 20.0, 1.0, 0.0});
  const auto rec = io::generate_synthetic_eeg(spec, 0);
  const auto windows = dsp::segment_windows(rec);
  REQUIRE(windows.size() == 1);
  const auto f = extract_features(windows[0]);

  const double eps = 1e-12;
  auto a = [&](const char* ch) { return oracle_power(rec.find(ch)->samples, 128.0, dsp::kAlpha); };
  auto b = [&](const char* ch) { return oracle_power(rec.find(ch)->samples, 128.0, dsp::kBeta); };
  const double arousal = (a("AF3") + a("AF4") + a("F3") + a("F4")) / std::max(b("AF3") + b("AF4") + b("F3") + b("F4"), eps);
  const double valence = a("F4") / std::max(b("F4"), eps) - a("F3") / std::max(b("F3"), eps);
  double dominance = 0.0;
  for (auto ch : {"FC6", "F8", "P8"}) dominance += b(ch) / std::max(a(ch), eps);

  CHECK(close(f.arousal, arousal, 1e-6));
  CHECK(close(f.dominance, dominance, 1e-6));
  CHECK(f.arousal == doctest::Approx(2.0 / eps).epsilon(1e-6));
  CHECK(f.dominance == doctest::Approx(1.5 / eps).epsilon(1e-6));
  CHECK(std::abs(f.valence - valence) <= 1e-6 * f.arousal);
}

TEST_CASE("scale invariance over random windows") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.2, 50.0);
  io::SynthSpec spec;
  spec.noise_std = 2.0;
  for (auto ch : io::kFeatureChannels) {
    spec.components.push_back({std::string(ch), 10.0, 3.0, 0.0});
    spec.components.push_back({std::string(ch), 21.0, 2.0, 0.0});
  }
  for (int trial = 0; trial < 100; ++trial) {
    auto rec = io::generate_synthetic_eeg(spec, static_cast<std::uint64_t>(trial));
    const auto f = extract_features(dsp::segment_windows(rec, {20.0, 20.0}, {}, Exec::Serial)[0]);
    const double c = (trial % 2 ? -1.0 : 1.0) * u(rng);
    for (auto& ch : rec.channels) {
      for (auto& v : ch.samples) v *= c;
    }
    const auto g = extract_features(dsp::segment_windows(rec, {20.0, 20.0}, {}, Exec::Serial)[0]);
    CHECK(close(f.arousal, g.arousal, 1e-9));
    CHECK(close(f.dominance, g.dominance, 1e-9));
    CHECK(std::abs(f.valence - g.valence) <= 1e-9 * std::max(1.0, std::abs(f.valence)));
  }
}

TEST_CASE("swapping F3 and F4 negates valence exactly") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    dsp::BandPowers bp;
    for (auto ch : io::kFeatureChannels) bp.channels[std::string(ch)] = {u(rng), u(rng), u(rng)};
    auto swapped = bp;
    std::swap(swapped.channels["F3"], swapped.channels["F4"]);
    CHECK(extract_features(swapped).valence == -extract_features(bp).valence);
  }

  io::SynthSpec spec;
  spec.noise_std = 1.0;
  spec.components = {{"F3", 10.0, 4.0, 0.0}, {"F4", 20.0, 3.0, 0.0}};
  auto rec = io::generate_synthetic_eeg(spec, 3);
  const double v = extract_features(dsp::segment_windows(rec)[0]).valence;
  auto* f3 = &rec.channels[2];
  auto* f4 = &rec.channels[11];
  REQUIRE(f3->label == "F3");
  REQUIRE(f4->label == "F4");
  std::swap(f3->samples, f4->samples);
  CHECK(extract_features(dsp::segment_windows(rec)[0]).valence == -v);
}

TEST_CASE("dominance grows with beta(P8)") {
  auto bp = uniform_powers(1.0, 1.0);
  double prev = extract_features(bp).dominance;
  for (int i = 0; i < 10; ++i) {
    bp.channels["P8"].beta *= 1.5;
    const double d = extract_features(bp).dominance;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("smoothing") {
  std::vector<FeatureVector> xs = {{1, 0, 3, 0}, {3, 2, 1, 20}};
  CHECK(smooth(xs, 1.0) == xs);
  const auto s = smooth(xs, 0.5);
  CHECK(s[1].arousal == 2.0);
  CHECK(s[1].valence == 1.0);
  CHECK(s[1].window_start == 20.0);
  CHECK_THROWS_AS(smooth(xs, 0.0), Error);
}
