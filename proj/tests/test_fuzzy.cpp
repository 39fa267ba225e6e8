#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vigil/error.hpp"
#include "vigil/fuzzy.hpp"

using namespace vigil;
using namespace vigil::fuzzy;

namespace {

using T = Term;

struct RuleRow {
  T arousal, valence, dominance, out;
  bool arousal_only;
};

// The nine rules typed in by hand, independent of default_rules().
const std::vector<RuleRow> kExpected = {
    {T::Medium, T::Small, T::Small, T::Small, true},  {T::Small, T::Small, T::Small, T::Small, false},
    {T::Large, T::Large, T::Large, T::Large, false},  {T::Large, T::Small, T::Medium, T::Small, false},
    {T::Large, T::Small, T::Large, T::Small, false},  {T::Small, T::Medium, T::Medium, T::Small, false},
    {T::Small, T::Large, T::Medium, T::Medium, false}, {T::Small, T::Medium, T::Large, T::Small, false},
    {T::Small, T::Large, T::Large, T::Medium, false},
};

// Centroid of the clipped output terms on n + 1 evenly spaced points.
double dense_centroid(const LinguisticVariable& out, const std::array<double, 3>& clip, std::size_t n) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = out.lo + (out.hi - out.lo) * static_cast<double>(i) / static_cast<double>(n);
    double mu = 0.0;
    for (std::size_t t = 0; t < 3; ++t) mu = std::max(mu, std::min(clip[t], out.terms[t].degree(x)));
    num += mu * x;
    den += mu;
  }
  return num / den;
}

std::array<double, 3> clip_per_term(const FuzzySystem& sys, const std::vector<double>& act) {
  std::array<double, 3> clip{};
  for (std::size_t r = 0; r < sys.rules.size(); ++r) {
    auto& c = clip[static_cast<std::size_t>(sys.rules[r].consequent)];
    c = std::max(c, act[r]);
  }
  return clip;
}

features::FeatureVector at(double a, double v, double d) { return {a, v, d, 0.0}; }

}  // namespace

TEST_CASE("default system has the nine rules") {
  const auto sys = build_default_system();
  REQUIRE(sys.rules.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto& r = sys.rules[i];
    const auto& e = kExpected[i];
    CHECK(r.output == "drowsiness");
    CHECK(r.consequent == e.out);
    if (e.arousal_only) {
      REQUIRE(r.antecedents.size() == 1);
      CHECK(r.antecedents[0] == Antecedent{"arousal", e.arousal});
    } else {
      REQUIRE(r.antecedents.size() == 3);
      CHECK(r.antecedents[0] == Antecedent{"arousal", e.arousal});
      CHECK(r.antecedents[1] == Antecedent{"valence", e.valence});
      CHECK(r.antecedents[2] == Antecedent{"dominance", e.dominance});
    }
  }
}

TEST_CASE("golden rulebase loads byte-identically") {
  const std::string golden = io::read_file(std::string(VIGIL_GOLDEN_DIR) + "/rulebase.json");
  const auto sys = import_json(golden);
  CHECK(sys == build_default_system());
  CHECK(export_json(sys) == golden);
  CHECK(export_json(build_default_system()) == golden);
}

TEST_CASE("import rejects broken rulebases") {
  CHECK_THROWS_AS(import_json("{}"), Error);
  CHECK_THROWS_AS(import_json("not json"), Error);
  std::string golden = io::read_file(std::string(VIGIL_GOLDEN_DIR) + "/rulebase.json");
  const auto pos = golden.find("\"valence\",\n          \"Small\"");
  REQUIRE(pos != std::string::npos);
  golden.replace(pos, 9, "\"valense\"");
  CHECK_THROWS_AS(import_json(golden), Error);
}

TEST_CASE("membership partition") {
  const auto v = make_variable("x", 0.0, 4.0);
  CHECK(v.term(T::Small).degree(0.0) == 1.0);
  CHECK(v.term(T::Medium).degree(2.0) == 1.0);
  CHECK(v.term(T::Large).degree(4.0) == 1.0);
  CHECK(v.term(T::Small).degree(1.0) == 0.5);
  CHECK(v.term(T::Medium).degree(1.0) == 0.5);
  for (int i = 0; i <= 400; ++i) {
    const double x = 4.0 * i / 400.0;
    double s = 0.0;
    for (auto t : kTerms) {
      const double d = v.term(t).degree(x);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
      s += d;
    }
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("calibrated peaks") {
  const auto sys = build_default_system({{"arousal", {-0.5, 10.5, {0.0, 5.0, 10.0}}}});
  CHECK(sys.input("arousal").term(T::Medium).b == 5.0);
  CHECK(sys.input("arousal").lo == -0.5);
  CHECK(sys.input("valence") == build_default_system().input("valence"));
  try {
    build_default_system({{"arousal", {-0.5, 10.5, {5.0, 0.0, 10.0}}}});
    FAIL("expected BadCalibration");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadCalibration);
  }
}

TEST_CASE("all-Large peaks fire rule 3") {
  const auto sys = build_default_system();
  const auto r = infer_mamdani(sys, at(4.0, 3.0, 9.0));
  CHECK(r.activations[2] == 1.0);
  CHECK(r.winning_term == T::Large);
  CHECK(classify_eeg_level(r.winning_term) == Level::Drowsy);
}

TEST_CASE("arousal at the Medium peak fires rule 1") {
  const auto sys = build_default_system();
  for (double v : {-3.0, -1.0, 0.0, 2.5}) {
    for (double d : {0.0, 4.5, 9.0}) {
      const auto r = infer_mamdani(sys, at(2.0, v, d));
      CHECK(r.activations[0] == 1.0);
      for (std::size_t i = 1; i < 9; ++i) CHECK(r.activations[i] == 0.0);
      CHECK(r.winning_term == T::Small);
      CHECK(classify_eeg_level(r.winning_term) == Level::Alert);
    }
  }
}

TEST_CASE("all-Small peaks fire rule 2") {
  const auto r = infer_mamdani(build_default_system(), at(0.0, -3.0, 0.0));
  CHECK(r.activations[1] == 1.0);
  CHECK(classify_eeg_level(r.winning_term) == Level::Alert);
}

TEST_CASE("uncovered combination falls back and is flagged") {
  const auto r = infer_mamdani(build_default_system(), at(0.0, -3.0, 9.0));
  CHECK(r.no_rule_fired);
  CHECK(r.crisp == 0.0);
  CHECK(r.winning_term == T::Small);
}

TEST_CASE("level mapping") {
  CHECK(classify_eeg_level(T::Large) == Level::Drowsy);
  CHECK(classify_eeg_level(T::Medium) == Level::Moderate);
  CHECK(classify_eeg_level(T::Small) == Level::Alert);
}

TEST_CASE("winning term ties go to the more severe term") {
  const auto out = build_default_system().output;
  CHECK(winning_term(out, 0.25) == T::Medium);
  CHECK(winning_term(out, 0.75) == T::Large);
  CHECK(winning_term(out, 0.2) == T::Small);
}

TEST_CASE("two-rule centroid against the dense oracle") {
  const auto sys = build_default_system();
  std::vector<double> act(9, 0.0);
  act[0] = 0.5;   // Small consequent
  act[2] = 0.25;  // Large consequent
  const double c = centroid(sys, act).value();
  CHECK(std::abs(c - dense_centroid(sys.output, {0.5, 0.0, 0.25}, 1'000'000)) <= 0.01);
}

TEST_CASE("201-point centroid within 0.01 of a 10^6-point oracle") {
  const auto sys = build_default_system();
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> act(9, 0.0);
    for (auto& a : act) a = rng() % 3 == 0 ? 0.0 : u(rng);
    act[rng() % 9] = u(rng) + 0.01;
    const double c = centroid(sys, act).value();
    const double ref = dense_centroid(sys.output, clip_per_term(sys, act), 1'000'000);
    CHECK(std::abs(c - ref) <= 0.01 * (sys.output.hi - sys.output.lo));
  }
}

TEST_CASE("zero activations have no centroid") {
  const auto sys = build_default_system();
  CHECK(!centroid(sys, std::vector<double>(9, 0.0)).has_value());
}

TEST_CASE("random inputs: centroid stays in the universe, clamping is exact") {
  const auto sys = build_default_system();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = at(u(rng), u(rng), u(rng));
    const auto r = infer_mamdani(sys, x);
    CHECK(r.crisp >= 0.0);
    CHECK(r.crisp <= 1.0);
    const auto clamped = at(sys.input("arousal").clamp(x.arousal), sys.input("valence").clamp(x.valence),
                            sys.input("dominance").clamp(x.dominance));
    const auto rc = infer_mamdani(sys, clamped);
    CHECK(rc.crisp == r.crisp);
    CHECK(rc.activations == r.activations);
    CHECK(infer_mamdani(sys, x).crisp == r.crisp);
  }
}

TEST_CASE("activation is monotone in each antecedent") {
  const auto sys = build_default_system();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Moving an input toward a term's peak raises that term's degree and,
  // with the other inputs fixed, cannot lower a rule that uses it.
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 3> in = {4.0 * u(rng), -3.0 + 6.0 * u(rng), 9.0 * u(rng)};
    const auto base = rule_activations(sys, in);
    for (std::size_t r = 0; r < sys.rules.size(); ++r) {
      for (const auto& a : sys.rules[r].antecedents) {
        std::size_t idx = a.variable == "arousal" ? 0 : a.variable == "valence" ? 1 : 2;
        const auto& mf = sys.inputs[idx].term(a.term);
        auto moved = in;
        moved[idx] = in[idx] + 0.5 * (mf.b - in[idx]);
        if (mf.degree(moved[idx]) < mf.degree(in[idx])) continue;
        CHECK(rule_activations(sys, moved)[r] >= base[r]);
      }
    }
  }
}
