#include "vigil/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "text.hpp"
#include "vigil/error.hpp"

namespace vigil::fcm {

namespace {

double sq_dist(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    d += diff * diff;
  }
  return d;
}

std::vector<Point> distinct_sorted(std::span<const Point> points) {
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

// Row i of U from the current centers. A point sitting exactly on a center
// belongs wholly to the first such center.
void membership_row(const Point& x, const std::vector<Point>& centers, double exponent, std::vector<double>& row) {
  const std::size_t c = centers.size();
  std::vector<double> d(c);
  double d_min = INFINITY;
  std::size_t coincident = c;
  for (std::size_t j = 0; j < c; ++j) {
    d[j] = sq_dist(x, centers[j]);
    if (d[j] == 0.0 && coincident == c) coincident = j;
    d_min = std::min(d_min, d[j]);
  }
  if (coincident < c) {
    std::fill(row.begin(), row.end(), 0.0);
    row[coincident] = 1.0;
    return;
  }
  // u_ij = (d_min / d_ij)^p / sum_k (d_min / d_ik)^p, p = 1/(m-1) on squared
  // distances; scaling by d_min keeps the powers in range.
  double total = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    row[j] = std::pow(d_min / d[j], exponent);
    total += row[j];
  }
  for (auto& u : row) u /= total;
}

void check_inputs(std::span<const Point> points, const FcmConfig& config) {
  if (points.empty()) throw Error(Errc::EmptyInput, "no points to cluster");
  if (config.c < 1) throw Error(Errc::InvalidConfig, "cluster count must be at least 1");
  if (!(config.m > 1.0)) throw Error(Errc::InvalidConfig, "fuzzifier m must exceed 1");
  if (config.max_iter < 1) throw Error(Errc::InvalidConfig, "max_iter must be at least 1");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw Error(Errc::InvalidConfig, "points have zero dimension");
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(Errc::InvalidConfig, "points have inconsistent dimensions");
    for (const double v : p) {
      if (!std::isfinite(v)) throw Error(Errc::InvalidConfig, "non-finite coordinate");
    }
  }
}

}  // namespace

std::vector<Point> initial_centers(std::span<const Point> points, std::size_t c, std::uint64_t seed) {
  const auto distinct = distinct_sorted(points);
  if (distinct.size() < c) {
    throw Error(Errc::DegenerateInput, std::to_string(distinct.size()) + " distinct points for " + std::to_string(c) +
                                           " clusters");
  }
  std::vector<Point> reservoir(distinct.begin(), distinct.begin() + static_cast<std::ptrdiff_t>(c));
  std::mt19937_64 rng(seed);
  for (std::size_t i = c; i < distinct.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    const std::size_t j = pick(rng);
    if (j < c) reservoir[j] = distinct[i];
  }
  std::sort(reservoir.begin(), reservoir.end());
  return reservoir;
}

FcmResult fcm_cluster(std::span<const Point> input, const FcmConfig& config, Exec exec,
                      const IterationObserver& observer) {
  check_inputs(input, config);
  const std::size_t n = input.size();
  const std::size_t dim = input.front().size();
  const std::size_t c = config.c;

  // Optional per-dimension standardization; centers are mapped back at the end.
  std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
  std::vector<Point> points(input.begin(), input.end());
  if (config.zscore) {
    for (std::size_t k = 0; k < dim; ++k) {
      double s = 0.0, s2 = 0.0;
      for (const auto& p : points) s += p[k];
      mean[k] = s / static_cast<double>(n);
      for (const auto& p : points) s2 += (p[k] - mean[k]) * (p[k] - mean[k]);
      const double sd = std::sqrt(s2 / static_cast<double>(n));
      scale[k] = sd > 0.0 ? sd : 1.0;
    }
    for (auto& p : points) {
      for (std::size_t k = 0; k < dim; ++k) p[k] = (p[k] - mean[k]) / scale[k];
    }
  }

  FcmResult result;
  result.centers = initial_centers(points, c, config.seed);
  result.memberships.assign(n, std::vector<double>(c, 0.0));
  auto& centers = result.centers;
  auto& u = result.memberships;
  const double exponent = 1.0 / (config.m - 1.0);
  std::vector<double> contrib(n);
  const auto total_n = static_cast<std::ptrdiff_t>(n);
  const auto total_c = static_cast<std::ptrdiff_t>(c);
  const bool parallel = exec == Exec::Parallel;

  for (std::size_t it = 1; it <= config.max_iter; ++it) {
#pragma omp parallel for if (parallel)
    for (std::ptrdiff_t i = 0; i < total_n; ++i) {
      membership_row(points[static_cast<std::size_t>(i)], centers, exponent, u[static_cast<std::size_t>(i)]);
    }

#pragma omp parallel for if (parallel)
    for (std::ptrdiff_t jj = 0; jj < total_c; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      Point acc(dim, 0.0);
      double weight = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::pow(u[i][j], config.m);
        weight += w;
        for (std::size_t k = 0; k < dim; ++k) acc[k] += w * points[i][k];
      }
      // A cluster that owns no mass keeps its previous position.
      if (weight > 0.0) {
        for (std::size_t k = 0; k < dim; ++k) centers[j][k] = acc[k] / weight;
      }
    }

#pragma omp parallel for if (parallel)
    for (std::ptrdiff_t ii = 0; ii < total_n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += std::pow(u[i][j], config.m) * sq_dist(points[i], centers[j]);
      contrib[i] = s;
    }
    double objective = 0.0;
    for (const double s : contrib) objective += s;

    result.objective_history.push_back(objective);
    result.objective = objective;
    result.iterations = it;
    if (observer) observer(IterationView{it, u, centers, objective});
    if (it > 1 && std::abs(result.objective_history[it - 2] - objective) < config.tol) break;
  }

  if (config.zscore) {
    for (auto& v : centers) {
      for (std::size_t k = 0; k < dim; ++k) v[k] = v[k] * scale[k] + mean[k];
    }
  }
  return result;
}

Calibration calibrate_universes(std::span<const features::FeatureVector> features, const FcmConfig& config, Exec exec,
                                const io::WarningSink& on_warning) {
  if (config.c != 3) throw Error(Errc::InvalidConfig, "calibration needs exactly 3 clusters (Small/Medium/Large)");
  if (features.empty()) throw Error(Errc::EmptyInput, "no feature vectors to calibrate from");
  std::vector<Point> points;
  points.reserve(features.size());
  for (const auto& f : features) points.push_back({f.arousal, f.valence, f.dominance});
  const auto fit = fcm_cluster(points, config, exec);

  static constexpr std::array<const char*, 3> kNames = {"arousal", "valence", "dominance"};
  Calibration out;
  for (std::size_t d = 0; d < 3; ++d) {
    std::array<double, 3> peaks{};
    for (std::size_t j = 0; j < 3; ++j) peaks[j] = fit.centers[j][d];
    std::sort(peaks.begin(), peaks.end());
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : points) {
      lo = std::min(lo, p[d]);
      hi = std::max(hi, p[d]);
    }
    const double span = hi - lo;
    if (!(span > 0.0) || !(peaks[0] < peaks[1] && peaks[1] < peaks[2])) {
      if (on_warning) {
        on_warning(std::string(kNames[d]) + ": cluster centres do not separate along this axis; keeping default terms");
      }
      continue;
    }
    out.emplace(kNames[d], VariableCalibration{lo - 0.05 * span, hi + 0.05 * span, peaks});
  }
  if (out.empty()) throw Error(Errc::DegenerateInput, "no feature dimension separates into three clusters");
  return out;
}

}  // namespace vigil::fcm
