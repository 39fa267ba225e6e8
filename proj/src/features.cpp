#include "vigil/features.hpp"

#include <algorithm>

#include "vigil/error.hpp"

namespace vigil::features {

FeatureVector extract_features(const dsp::BandPowers& powers, const FeatureOptions& options) {
  // Resolve every electrode first so a missing one is reported before any math.
  const auto& af3 = powers.at("AF3");
  const auto& af4 = powers.at("AF4");
  const auto& f3 = powers.at("F3");
  const auto& f4 = powers.at("F4");
  const auto& fc6 = powers.at("FC6");
  const auto& f8 = powers.at("F8");
  const auto& p8 = powers.at("P8");

  const double eps = options.eps;
  const auto guard = [eps](double d) { return std::max(d, eps); };

  const double alpha_sum = af3.alpha + af4.alpha + f3.alpha + f4.alpha;
  const double beta_sum = af3.beta + af4.beta + f3.beta + f4.beta;

  FeatureVector fv;
  fv.window_start = powers.window_start;
  fv.arousal = options.invert_arousal ? beta_sum / guard(alpha_sum) : alpha_sum / guard(beta_sum);
  fv.valence = f4.alpha / guard(f4.beta) - f3.alpha / guard(f3.beta);
  fv.dominance = fc6.beta / guard(fc6.alpha) + f8.beta / guard(f8.alpha) + p8.beta / guard(p8.alpha);
  return fv;
}

std::vector<FeatureVector> smooth(std::span<const FeatureVector> xs, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw Error(Errc::InvalidConfig, "smoothing factor must lie in (0, 1]");
  std::vector<FeatureVector> out(xs.begin(), xs.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i].arousal = factor * xs[i].arousal + (1.0 - factor) * out[i - 1].arousal;
    out[i].valence = factor * xs[i].valence + (1.0 - factor) * out[i - 1].valence;
    out[i].dominance = factor * xs[i].dominance + (1.0 - factor) * out[i - 1].dominance;
  }
  return out;
}

}  // namespace vigil::features
