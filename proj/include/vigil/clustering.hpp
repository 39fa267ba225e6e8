#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vigil/calibration.hpp"
#include "vigil/exec.hpp"
#include "vigil/features.hpp"
#include "vigil/signal_io.hpp"

namespace vigil::fcm {

using Point = std::vector<double>;

struct FcmConfig {
  std::size_t c = 3;           // cluster count
  double m = 2.0;              // fuzzifier, > 1
  double tol = 1e-6;           // stop once |J_prev - J| < tol
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  bool zscore = false;         // standardize each dimension before fitting
};

struct FcmResult {
  std::vector<Point> centers;                    // c points, raw feature space
  std::vector<std::vector<double>> memberships;  // n rows of c degrees
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;         // J after each iteration
};

// Snapshot handed to an observer after every iteration.
struct IterationView {
  std::size_t iteration;
  const std::vector<std::vector<double>>& memberships;
  const std::vector<Point>& centers;
  double objective;
};

using IterationObserver = std::function<void(const IterationView&)>;

// Seed centers: the distinct points sorted lexicographically, then c of them
// drawn by seeded reservoir sampling. Independent of input order.
std::vector<Point> initial_centers(std::span<const Point> points, std::size_t c, std::uint64_t seed);

// Fuzzy C-means by alternating optimization. Each iteration updates
// memberships from the current centers, then centers from the memberships,
// then records J = sum_i sum_j u_ij^m |x_i - v_j|^2.
//
// Throws Error(EmptyInput), Error(DegenerateInput) when there are fewer
// distinct points than clusters, Error(InvalidConfig) for c < 1, m <= 1 or
// ragged dimensions.
FcmResult fcm_cluster(std::span<const Point> points, const FcmConfig& config = {}, Exec exec = Exec::Parallel,
                      const IterationObserver& observer = {});

// Clusters (arousal, valence, dominance) vectors with c = 3 and turns each
// dimension's sorted centre projections into Small/Medium/Large peaks, with
// universe = observed range widened by 5% of its span on each side.
// A dimension whose projections do not come out strictly increasing keeps the
// default layout (left out of the result, reported through on_warning).
// Throws Error(DegenerateInput) when no dimension can be calibrated.
Calibration calibrate_universes(std::span<const features::FeatureVector> features, const FcmConfig& config = {},
                                Exec exec = Exec::Parallel, const io::WarningSink& on_warning = {});

}  // namespace vigil::fcm
