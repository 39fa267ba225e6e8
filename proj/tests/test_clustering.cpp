#include <doctest.h>

#include <algorithm>
#include <random>

#include "vigil/clustering.hpp"
#include "vigil/error.hpp"

using namespace vigil;
using namespace vigil::fcm;

namespace {

std::vector<Point> blobs(std::uint64_t seed, const std::vector<Point>& means, std::size_t per, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<Point> pts;
  for (const auto& m : means) {
    for (std::size_t i = 0; i < per; ++i) {
      Point p(m);
      for (auto& v : p) v += d(rng);
      pts.push_back(p);
    }
  }
  return pts;
}

std::vector<Point> random_points(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return pts;
}

Point mean_of(const std::vector<Point>& pts, std::size_t from, std::size_t to) {
  Point m(pts[0].size(), 0.0);
  for (std::size_t i = from; i < to; ++i) {
    for (std::size_t d = 0; d < m.size(); ++d) m[d] += pts[i][d];
  }
  for (auto& v : m) v /= static_cast<double>(to - from);
  return m;
}

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("single cluster is the mean") {
  const auto pts = random_points(1, 40, 3);
  FcmConfig cfg;
  cfg.c = 1;
  const auto r = fcm_cluster(pts, cfg);
  const auto m = mean_of(pts, 0, pts.size());
  for (std::size_t d = 0; d < 3; ++d) CHECK(r.centers[0][d] == doctest::Approx(m[d]).epsilon(1e-12));
  for (const auto& row : r.memberships) CHECK(row[0] == 1.0);
}

TEST_CASE("two blobs recover their means") {
  const auto pts = blobs(42, {{0, 0, 0}, {10, 10, 10}}, 100, 0.1);
  FcmConfig cfg;
  cfg.c = 2;
  const auto r = fcm_cluster(pts, cfg);
  const Point m0 = mean_of(pts, 0, 100);
  const Point m1 = mean_of(pts, 100, 200);
  const std::size_t own0 = dist(r.centers[0], m0) < dist(r.centers[1], m0) ? 0 : 1;
  CHECK(dist(r.centers[own0], m0) < 0.1);
  CHECK(dist(r.centers[1 - own0], m1) < 0.1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t own = i < 100 ? own0 : 1 - own0;
    CHECK(r.memberships[i][own] >= 0.99);
  }
}

TEST_CASE("rows sum to one at every iteration") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = random_points(seed, 60, 3);
    FcmConfig cfg;
    cfg.seed = seed;
    std::size_t seen = 0;
    double worst = 0.0;
    fcm_cluster(pts, cfg, Exec::Serial, [&](const IterationView& v) {
      ++seen;
      for (const auto& row : v.memberships) {
        double s = 0.0;
        for (double u : row) {
          CHECK(u >= 0.0);
          CHECK(u <= 1.0);
          s += u;
        }
        worst = std::max(worst, std::abs(s - 1.0));
      }
    });
    CHECK(seen > 0);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("objective never increases over 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pts = random_points(1000 + seed, 50, 3);
    FcmConfig cfg;
    cfg.seed = seed;
    cfg.c = 2 + seed % 3;
    const auto r = fcm_cluster(pts, cfg);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      CHECK(r.objective_history[i] <= r.objective_history[i - 1] * (1.0 + 1e-12));
    }
    CHECK(r.objective == r.objective_history.back());
    CHECK(r.iterations == r.objective_history.size());
  }
}

TEST_CASE("input order does not matter") {
  auto pts = blobs(9, {{0, 0, 0}, {4, 1, 0}, {1, 6, 2}}, 30, 0.8);
  const auto a = fcm_cluster(pts, {});
  std::mt19937_64 rng(5);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = fcm_cluster(pts, {});
  for (const auto& ca : a.centers) {
    double best = 1e300;
    for (const auto& cb : b.centers) best = std::min(best, dist(ca, cb));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("a point on a center takes full membership") {
  // Seed centers are data points, so the first membership pass hits the singularity.
  const auto pts = random_points(2, 12, 2);
  FcmConfig cfg;
  cfg.seed = 4;
  const auto seeds = initial_centers(pts, cfg.c, cfg.seed);
  std::size_t hits = 0;
  fcm_cluster(pts, cfg, Exec::Serial, [&](const IterationView& v) {
    if (v.iteration != 1) return;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < seeds.size(); ++j) {
        if (pts[i] != seeds[j]) continue;
        ++hits;
        for (std::size_t k = 0; k < seeds.size(); ++k) CHECK(v.memberships[i][k] == (k == j ? 1.0 : 0.0));
      }
    }
  });
  CHECK(hits == seeds.size());
}

TEST_CASE("initial centers are order independent") {
  auto pts = random_points(4, 25, 2);
  const auto a = initial_centers(pts, 3, 17);
  std::reverse(pts.begin(), pts.end());
  CHECK(initial_centers(pts, 3, 17) == a);
}

TEST_CASE("fcm errors") {
  CHECK(code_of([] { fcm_cluster(std::vector<Point>{}, {}); }) == Errc::EmptyInput);
  CHECK(code_of([] { fcm_cluster(std::vector<Point>{{1}, {1}, {2}}, {}); }) == Errc::DegenerateInput);
  CHECK(code_of([] { fcm_cluster(std::vector<Point>{{1}, {2, 3}}, {.c = 1}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { fcm_cluster(std::vector<Point>{{1}, {2}}, {.c = 1, .m = 1.0}); }) == Errc::InvalidConfig);
}

TEST_CASE("serial and parallel fits agree") {
  const auto pts = random_points(8, 500, 3);
  const auto a = fcm_cluster(pts, {}, Exec::Serial);
  const auto b = fcm_cluster(pts, {}, Exec::Parallel);
  CHECK(a.centers == b.centers);
  CHECK(a.memberships == b.memberships);
  CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("calibration from three arousal blobs") {
  std::vector<features::FeatureVector> fv;
  for (double a : {0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 10.0, 10.0, 10.0}) fv.push_back({a, 0.0, 3.0, 0.0});
  std::vector<std::string> warnings;
  const auto cal = calibrate_universes(fv, {}, Exec::Serial, [&](std::string_view w) { warnings.emplace_back(w); });
  REQUIRE(cal.count("arousal") == 1);
  const auto& ar = cal.at("arousal");
  CHECK(ar.peaks[0] == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(ar.peaks[1] == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(ar.peaks[2] == doctest::Approx(10.0).epsilon(1e-3));
  CHECK(ar.lo == doctest::Approx(-0.5));
  CHECK(ar.hi == doctest::Approx(10.5));
  CHECK(cal.count("valence") == 0);
  CHECK(cal.count("dominance") == 0);
  CHECK(warnings.size() == 2);
}

TEST_CASE("calibration peaks are strictly increasing") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<features::FeatureVector> fv(30);
    for (auto& f : fv) f = {u(rng), u(rng) - 2.0, 2.0 * u(rng), 0.0};
    FcmConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    for (const auto& [name, v] : calibrate_universes(fv, cfg)) {
      CHECK(v.lo < v.peaks[0]);
      CHECK(v.peaks[0] < v.peaks[1]);
      CHECK(v.peaks[1] < v.peaks[2]);
      CHECK(v.peaks[2] < v.hi);
    }
  }
}

TEST_CASE("identical features cannot be calibrated") {
  std::vector<features::FeatureVector> fv(5, {1.0, 0.0, 3.0, 0.0});
  CHECK(code_of([&] { calibrate_universes(fv); }) == Errc::DegenerateInput);
}

TEST_CASE("calibration JSON round trip") {
  Calibration cal;
  cal["arousal"] = {-0.5, 10.5, {0.1, 5.0, 9.9}};
  cal["dominance"] = {0.0, 9.0, {1.0, 4.5, 8.0}};
  CHECK(calibration_from_json(calibration_to_json(cal)) == cal);
  CHECK_THROWS_AS(calibration_from_json("{\"arousal\": {\"lo\": 0}}"), Error);
  CHECK_THROWS_AS(calibration_from_json("[1,2]"), Error);
}
