#include "vigil/fuzzy.hpp"

#include <algorithm>
#include <cmath>

#include "text.hpp"
#include "vigil/error.hpp"

namespace vigil::fuzzy {

std::string_view to_string(Term term) {
  switch (term) {
    case Term::Small: return "Small";
    case Term::Medium: return "Medium";
    case Term::Large: return "Large";
  }
  return "?";
}

std::optional<Term> term_from_string(std::string_view name) {
  const auto lower = detail::to_lower(name);
  if (lower == "small") return Term::Small;
  if (lower == "medium") return Term::Medium;
  if (lower == "large") return Term::Large;
  return std::nullopt;
}

double MembershipFunction::degree(double x) const {
  switch (shoulder) {
    case Shoulder::Left:
      if (x <= b) return 1.0;
      if (x >= c) return 0.0;
      return (c - x) / (c - b);
    case Shoulder::Right:
      if (x >= b) return 1.0;
      if (x <= a) return 0.0;
      return (x - a) / (b - a);
    case Shoulder::None:
      break;
  }
  if (x == b) return 1.0;
  if (x <= a || x >= c) return 0.0;
  return x < b ? (x - a) / (b - a) : (c - x) / (c - b);
}

double LinguisticVariable::clamp(double x) const {
  if (std::isnan(x)) return lo;
  return std::clamp(x, lo, hi);
}

LinguisticVariable make_variable(std::string name, double lo, double hi, const std::array<double, 3>& p) {
  const auto fmt = [](double v) { return detail::format_double(v); };
  if (!(lo < hi)) throw Error(Errc::BadCalibration, name + ": universe lower bound must be below upper bound");
  if (!(lo <= p[0] && p[0] < p[1] && p[1] < p[2] && p[2] <= hi)) {
    throw Error(Errc::BadCalibration, name + ": peaks (" + fmt(p[0]) + ", " + fmt(p[1]) + ", " + fmt(p[2]) +
                                          ") must be strictly increasing within [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  LinguisticVariable v;
  v.name = std::move(name);
  v.lo = lo;
  v.hi = hi;
  v.terms[0] = {lo, p[0], p[1], Shoulder::Left};
  v.terms[1] = {p[0], p[1], p[2], Shoulder::None};
  v.terms[2] = {p[1], p[2], hi, Shoulder::Right};
  return v;
}

LinguisticVariable make_variable(std::string name, double lo, double hi) {
  return make_variable(std::move(name), lo, hi, {lo, 0.5 * (lo + hi), hi});
}

const LinguisticVariable& FuzzySystem::input(std::string_view name) const {
  for (const auto& v : inputs) {
    if (v.name == name) return v;
  }
  throw Error(Errc::InvalidConfig, "no input variable named " + std::string(name));
}

void validate(const FuzzySystem& system) {
  static constexpr std::array<std::string_view, 3> kInputs = {"arousal", "valence", "dominance"};
  if (system.inputs.size() != kInputs.size()) throw Error(Errc::InvalidConfig, "expected three input variables");
  for (std::size_t i = 0; i < kInputs.size(); ++i) {
    if (system.inputs[i].name != kInputs[i]) {
      throw Error(Errc::InvalidConfig, "input " + std::to_string(i) + " must be " + std::string(kInputs[i]));
    }
  }
  if (system.samples < 2) throw Error(Errc::InvalidConfig, "defuzzification needs at least 2 samples");
  for (std::size_t r = 0; r < system.rules.size(); ++r) {
    const auto& rule = system.rules[r];
    const auto where = "rule " + std::to_string(r + 1);
    if (rule.antecedents.empty()) throw Error(Errc::InvalidConfig, where + " has no antecedent");
    for (const auto& a : rule.antecedents) system.input(a.variable);
    if (rule.output != system.output.name) {
      throw Error(Errc::InvalidConfig, where + " concludes on unknown variable " + rule.output);
    }
  }
}

std::vector<Rule> default_rules() {
  using T = Term;
  const auto rule = [](std::vector<Antecedent> ants, Term out) { return Rule{std::move(ants), "drowsiness", out}; };
  return {
      rule({{"arousal", T::Medium}}, T::Small),
      rule({{"arousal", T::Small}, {"valence", T::Small}, {"dominance", T::Small}}, T::Small),
      rule({{"arousal", T::Large}, {"valence", T::Large}, {"dominance", T::Large}}, T::Large),
      rule({{"arousal", T::Large}, {"valence", T::Small}, {"dominance", T::Medium}}, T::Small),
      rule({{"arousal", T::Large}, {"valence", T::Small}, {"dominance", T::Large}}, T::Small),
      rule({{"arousal", T::Small}, {"valence", T::Medium}, {"dominance", T::Medium}}, T::Small),
      rule({{"arousal", T::Small}, {"valence", T::Large}, {"dominance", T::Medium}}, T::Medium),
      rule({{"arousal", T::Small}, {"valence", T::Medium}, {"dominance", T::Large}}, T::Small),
      rule({{"arousal", T::Small}, {"valence", T::Large}, {"dominance", T::Large}}, T::Medium),
  };
}

FuzzySystem build_default_system(const Calibration& calibration) {
  struct Default {
    const char* name;
    double lo, hi;
  };
  static constexpr std::array<Default, 3> kDefaults = {{{"arousal", 0.0, 4.0}, {"valence", -3.0, 3.0},
                                                        {"dominance", 0.0, 9.0}}};
  for (const auto& [name, var] : calibration) {
    if (std::none_of(kDefaults.begin(), kDefaults.end(), [&](const Default& d) { return name == d.name; })) {
      throw Error(Errc::BadCalibration, "calibration names unknown variable " + name);
    }
  }

  FuzzySystem sys;
  for (const auto& d : kDefaults) {
    const auto it = calibration.find(d.name);
    if (it == calibration.end()) {
      sys.inputs.push_back(make_variable(d.name, d.lo, d.hi));
    } else {
      sys.inputs.push_back(make_variable(d.name, it->second.lo, it->second.hi, it->second.peaks));
    }
  }
  sys.output = make_variable("drowsiness", 0.0, 1.0);
  sys.rules = default_rules();
  validate(sys);
  return sys;
}

std::vector<double> rule_activations(const FuzzySystem& system, std::span<const double> inputs) {
  std::vector<double> out;
  out.reserve(system.rules.size());
  for (const auto& rule : system.rules) {
    double strength = 1.0;
    for (const auto& a : rule.antecedents) {
      std::size_t idx = 0;
      while (system.inputs[idx].name != a.variable) ++idx;
      strength = std::min(strength, system.inputs[idx].term(a.term).degree(inputs[idx]));
    }
    out.push_back(strength);
  }
  return out;
}

double aggregate(const FuzzySystem& system, std::span<const double> activations, double x) {
  double mu = 0.0;
  for (std::size_t r = 0; r < system.rules.size(); ++r) {
    if (activations[r] <= 0.0) continue;
    mu = std::max(mu, std::min(activations[r], system.output.term(system.rules[r].consequent).degree(x)));
  }
  return mu;
}

std::optional<double> centroid(const FuzzySystem& system, std::span<const double> activations) {
  const auto& out = system.output;
  const double step = (out.hi - out.lo) / static_cast<double>(system.samples - 1);
  double mass = 0.0, moment = 0.0;
  for (std::size_t s = 0; s < system.samples; ++s) {
    const double x = out.lo + step * static_cast<double>(s);
    const double mu = aggregate(system, activations, x);
    mass += mu;
    moment += mu * x;
  }
  if (!(mass > 0.0)) return std::nullopt;
  return std::clamp(moment / mass, out.lo, out.hi);
}

Term winning_term(const LinguisticVariable& output, double crisp) {
  Term best = Term::Small;
  double best_degree = -1.0;
  for (const Term t : kTerms) {
    const double d = output.term(t).degree(crisp);
    if (d >= best_degree) {
      best = t;
      best_degree = d;
    }
  }
  return best;
}

Inference infer_mamdani(const FuzzySystem& system, const features::FeatureVector& x) {
  Inference inf;
  inf.inputs = {system.inputs[0].clamp(x.arousal), system.inputs[1].clamp(x.valence),
                system.inputs[2].clamp(x.dominance)};
  inf.activations = rule_activations(system, inf.inputs);
  if (const auto c = centroid(system, inf.activations)) {
    inf.crisp = *c;
    inf.winning_term = winning_term(system.output, *c);
  } else {
    inf.crisp = system.output.lo;
    inf.winning_term = Term::Small;
    inf.no_rule_fired = true;
  }
  return inf;
}

Level classify_eeg_level(Term term) {
  switch (term) {
    case Term::Large: return Level::Drowsy;
    case Term::Medium: return Level::Moderate;
    case Term::Small: return Level::Alert;
  }
  return Level::Alert;
}

}  // namespace vigil::fuzzy
