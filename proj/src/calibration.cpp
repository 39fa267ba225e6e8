#include "vigil/calibration.hpp"

#include <json.hpp>

#include "vigil/error.hpp"

namespace vigil {

std::string calibration_to_json(const Calibration& calibration) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, var] : calibration) {
    doc[name] = {{"lo", var.lo}, {"hi", var.hi}, {"peaks", var.peaks}};
  }
  return doc.dump(2) + "\n";
}

Calibration calibration_from_json(std::string_view text) {
  Calibration out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw Error(Errc::BadCalibration, "calibration document must be a JSON object");
    for (const auto& [name, var] : doc.items()) {
      VariableCalibration vc;
      vc.lo = var.at("lo").get<double>();
      vc.hi = var.at("hi").get<double>();
      const auto& peaks = var.at("peaks");
      if (!peaks.is_array() || peaks.size() != 3) {
        throw Error(Errc::BadCalibration, name + ": peaks must hold exactly three values");
      }
      for (std::size_t i = 0; i < 3; ++i) vc.peaks[i] = peaks[i].get<double>();
      out.emplace(name, vc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadCalibration, std::string("calibration JSON: ") + e.what());
  }
  return out;
}

}  // namespace vigil
