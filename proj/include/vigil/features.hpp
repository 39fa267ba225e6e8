#pragma once

#include <span>
#include <vector>

#include "vigil/dsp.hpp"

namespace vigil::features {

struct FeatureVector {
  double arousal = 0.0;
  double valence = 0.0;
  double dominance = 0.0;
  double window_start = 0.0;

  bool operator==(const FeatureVector&) const = default;
};

struct FeatureOptions {
  double eps = 1e-12;           // substitutes for zero denominators (uV^2)
  bool invert_arousal = false;  // beta-sum over alpha-sum instead of alpha over beta
};

//   arousal   = sum_a / max(sum_b, eps)             over AF3, AF4, F3, F4
//   valence   = a(F4)/max(b(F4),eps) - a(F3)/max(b(F3),eps)
//   dominance = sum over FC6, F8, P8 of b/max(a,eps)
// Throws Error(MissingChannel) naming the absent electrode.
FeatureVector extract_features(const dsp::BandPowers& powers, const FeatureOptions& options = {});

// Exponential smoothing across consecutive windows: y_0 = x_0,
// y_i = factor * x_i + (1 - factor) * y_{i-1}. factor = 1 leaves the input as is.
std::vector<FeatureVector> smooth(std::span<const FeatureVector> xs, double factor);

}  // namespace vigil::features
