#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/calibration.hpp"
#include "vigil/features.hpp"
#include "vigil/level.hpp"

namespace vigil::fuzzy {

enum class Term : std::uint8_t { Small = 0, Medium = 1, Large = 2 };

inline constexpr std::array<Term, 3> kTerms = {Term::Small, Term::Medium, Term::Large};

std::string_view to_string(Term term);
std::optional<Term> term_from_string(std::string_view name);

// Left shoulder: 1 up to b, falling to 0 at c. Right shoulder: 0 up to a,
// rising to 1 at b and staying there. None: plain triangle (a, b, c).
enum class Shoulder : std::uint8_t { None, Left, Right };

struct MembershipFunction {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Shoulder shoulder = Shoulder::None;

  double degree(double x) const;

  bool operator==(const MembershipFunction&) const = default;
};

struct LinguisticVariable {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::array<MembershipFunction, 3> terms;  // indexed by Term

  const MembershipFunction& term(Term t) const { return terms[static_cast<std::size_t>(t)]; }
  double clamp(double x) const;

  bool operator==(const LinguisticVariable&) const = default;
};

// Small = left shoulder peaking at peaks[0], Medium = triangle on peaks,
// Large = right shoulder from peaks[2]; adjacent terms cross at 0.5.
// Throws Error(BadCalibration) unless lo <= p0 < p1 < p2 <= hi and lo < hi.
LinguisticVariable make_variable(std::string name, double lo, double hi, const std::array<double, 3>& peaks);

// Evenly spaced peaks (lo, mid, hi).
LinguisticVariable make_variable(std::string name, double lo, double hi);

struct Antecedent {
  std::string variable;
  Term term;

  bool operator==(const Antecedent&) const = default;
};

// Antecedents are AND-ed.
struct Rule {
  std::vector<Antecedent> antecedents;
  std::string output;
  Term consequent;

  bool operator==(const Rule&) const = default;
};

// Mamdani system with min AND, min implication, max aggregation and centroid
// defuzzification over `samples` evenly spaced output points.
struct FuzzySystem {
  std::vector<LinguisticVariable> inputs;
  LinguisticVariable output;
  std::vector<Rule> rules;
  std::size_t samples = 201;

  const LinguisticVariable& input(std::string_view name) const;

  bool operator==(const FuzzySystem&) const = default;
};

// Throws Error(InvalidConfig) when rules reference unknown variables or have
// no antecedents, or when the input set is not arousal/valence/dominance.
void validate(const FuzzySystem& system);

// The nine arousal/valence/dominance rules with default universes
// arousal [0,4], valence [-3,3], dominance [0,9] and output drowsiness [0,1].
// Calibrated variables replace their defaults.
FuzzySystem build_default_system(const Calibration& calibration = {});

std::vector<Rule> default_rules();

struct Inference {
  double crisp = 0.0;
  Term winning_term = Term::Small;
  std::vector<double> activations;  // one per rule
  std::array<double, 3> inputs{};   // clamped arousal, valence, dominance
  bool no_rule_fired = false;       // aggregate had zero mass; fallback applied
};

// Inputs outside their universes are clamped. When no rule fires the result
// is Small at the output universe's lower bound with no_rule_fired set.
Inference infer_mamdani(const FuzzySystem& system, const features::FeatureVector& x);

// Rule strengths for clamped inputs given in system.inputs order.
std::vector<double> rule_activations(const FuzzySystem& system, std::span<const double> inputs);

// Aggregated output membership at x: max over rules of min(activation, consequent(x)).
double aggregate(const FuzzySystem& system, std::span<const double> activations, double x);

// Centroid of the aggregate sampled at system.samples points; nullopt on zero mass.
std::optional<double> centroid(const FuzzySystem& system, std::span<const double> activations);

// Term with the highest output degree at `crisp`; ties go to the more severe term.
Term winning_term(const LinguisticVariable& output, double crisp);

// Large -> 2, Medium -> 1, Small -> 0.
Level classify_eeg_level(Term term);

// Canonical JSON form of the universes, terms, rules and operators.
std::string export_json(const FuzzySystem& system);

// Throws Error(InvalidConfig) on schema violations.
FuzzySystem import_json(std::string_view text);

}  // namespace vigil::fuzzy
