#include <json.hpp>

#include "vigil/error.hpp"
#include "vigil/fuzzy.hpp"

namespace vigil::fuzzy {

namespace {

using nlohmann::json;

std::string_view shoulder_name(Shoulder s) {
  switch (s) {
    case Shoulder::Left: return "left";
    case Shoulder::Right: return "right";
    case Shoulder::None: break;
  }
  return "none";
}

Shoulder shoulder_from(const std::string& s) {
  if (s == "left") return Shoulder::Left;
  if (s == "right") return Shoulder::Right;
  if (s == "none") return Shoulder::None;
  throw Error(Errc::InvalidConfig, "unknown shoulder '" + s + "'");
}

Term term_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto t = term_from_string(name);
  if (!t) throw Error(Errc::InvalidConfig, "unknown term '" + name + "'");
  return *t;
}

json variable_to_json(const LinguisticVariable& v) {
  json terms = json::object();
  for (const Term t : kTerms) {
    const auto& mf = v.term(t);
    terms[std::string(to_string(t))] = {{"a", mf.a}, {"b", mf.b}, {"c", mf.c}, {"shoulder", shoulder_name(mf.shoulder)}};
  }
  return {{"name", v.name}, {"universe", {v.lo, v.hi}}, {"terms", terms}};
}

LinguisticVariable variable_from_json(const json& j) {
  LinguisticVariable v;
  v.name = j.at("name").get<std::string>();
  const auto& universe = j.at("universe");
  if (!universe.is_array() || universe.size() != 2) throw Error(Errc::InvalidConfig, v.name + ": universe must be [lo, hi]");
  v.lo = universe[0].get<double>();
  v.hi = universe[1].get<double>();
  if (!(v.lo < v.hi)) throw Error(Errc::InvalidConfig, v.name + ": empty universe");
  const auto& terms = j.at("terms");
  if (terms.size() != 3) throw Error(Errc::InvalidConfig, v.name + ": expected Small, Medium and Large terms");
  for (const Term t : kTerms) {
    const auto& mf = terms.at(std::string(to_string(t)));
    auto& out = v.terms[static_cast<std::size_t>(t)];
    out.a = mf.at("a").get<double>();
    out.b = mf.at("b").get<double>();
    out.c = mf.at("c").get<double>();
    out.shoulder = shoulder_from(mf.at("shoulder").get<std::string>());
    if (!(out.a <= out.b && out.b <= out.c)) {
      throw Error(Errc::InvalidConfig, v.name + "." + std::string(to_string(t)) + ": feet and peak must satisfy a <= b <= c");
    }
  }
  return v;
}

}  // namespace

std::string export_json(const FuzzySystem& system) {
  json doc;
  doc["inputs"] = json::array();
  for (const auto& v : system.inputs) doc["inputs"].push_back(variable_to_json(v));
  doc["output"] = variable_to_json(system.output);
  doc["rules"] = json::array();
  for (const auto& r : system.rules) {
    json ants = json::array();
    for (const auto& a : r.antecedents) ants.push_back({a.variable, to_string(a.term)});
    doc["rules"].push_back({{"if", ants}, {"then", {r.output, to_string(r.consequent)}}});
  }
  doc["operators"] = {{"and", "min"},
                      {"implication", "min"},
                      {"aggregation", "max"},
                      {"defuzzifier", "centroid"},
                      {"samples", system.samples}};
  return doc.dump(2) + "\n";
}

FuzzySystem import_json(std::string_view text) {
  FuzzySystem sys;
  try {
    const auto doc = json::parse(text);
    const auto& ops = doc.at("operators");
    if (ops.at("and") != "min" || ops.at("implication") != "min" || ops.at("aggregation") != "max" ||
        ops.at("defuzzifier") != "centroid") {
      throw Error(Errc::InvalidConfig, "only min/min/max/centroid Mamdani systems are supported");
    }
    sys.samples = ops.at("samples").get<std::size_t>();
    for (const auto& v : doc.at("inputs")) sys.inputs.push_back(variable_from_json(v));
    sys.output = variable_from_json(doc.at("output"));
    for (const auto& r : doc.at("rules")) {
      Rule rule;
      for (const auto& a : r.at("if")) rule.antecedents.push_back({a.at(0).get<std::string>(), term_from(a.at(1))});
      rule.output = r.at("then").at(0).get<std::string>();
      rule.consequent = term_from(r.at("then").at(1));
      sys.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("rulebase JSON: ") + e.what());
  }
  validate(sys);
  return sys;
}

}  // namespace vigil::fuzzy
