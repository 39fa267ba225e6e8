#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "vigil/error.hpp"
#include "vigil/vision.hpp"

namespace vigil::vision {

void validate(const DetectParams& p) {
  if (!(p.scale_factor >= 1.0)) throw Error(Errc::InvalidConfig, "scale_factor must be >= 1");
  if (p.step < 1) throw Error(Errc::InvalidConfig, "step must be at least one pixel");
  if (p.min_size < 0 || p.max_size < 0) throw Error(Errc::InvalidConfig, "min_size/max_size must be non-negative");
  if (p.min_neighbors < 0) throw Error(Errc::InvalidConfig, "min_neighbors must be non-negative");
  if (!(p.group_eps >= 0.0)) throw Error(Errc::InvalidConfig, "group_eps must be non-negative");
  if (!(p.min_stddev >= 0.0)) throw Error(Errc::InvalidConfig, "min_stddev must be non-negative");
}

ScaledCascade::ScaledCascade(const HaarCascade& cascade, double scale, double min_stddev)
    : cascade_(&cascade), scale_(scale), min_stddev_(min_stddev) {
  const auto r = [scale](int v) { return static_cast<int>(std::lround(v * scale)); };
  win_w_ = r(cascade.window_w);
  win_h_ = r(cascade.window_h);
  // Normalization over the window inset by one base pixel.
  const int inset = std::max(1, r(1));
  norm_x_ = inset;
  norm_y_ = inset;
  norm_w_ = std::max(1, win_w_ - 2 * inset);
  norm_h_ = std::max(1, win_h_ - 2 * inset);

  features_.reserve(cascade.features.size());
  for (const auto& f : cascade.features) {
    std::vector<ScaledRect> rects;
    for (const auto& rect : f.rects) {
      const int x = std::min(r(rect.x), win_w_ - 1);
      const int y = std::min(r(rect.y), win_h_ - 1);
      const int w = std::clamp(r(rect.w), 1, win_w_ - x);
      const int h = std::clamp(r(rect.h), 1, win_h_ - y);
      rects.push_back({x, y, w, h, rect.weight});
    }
    // Rounding changes the rect areas; re-balance the first weight so the
    // feature keeps a zero response on flat patches.
    if (rects.size() > 1) {
      double others = 0.0;
      for (std::size_t k = 1; k < rects.size(); ++k) others += rects[k].weight * rects[k].w * rects[k].h;
      rects[0].weight = -others / (static_cast<double>(rects[0].w) * rects[0].h);
    }
    features_.push_back(std::move(rects));
  }
}

std::optional<double> ScaledCascade::norm_factor(const IntegralImage& ii, int x, int y) const {
  const auto area = static_cast<__int128>(norm_w_) * norm_h_;
  const auto s = static_cast<__int128>(ii.rect_sum(x + norm_x_, y + norm_y_, norm_w_, norm_h_));
  const auto sq = static_cast<__int128>(ii.rect_sq_sum(x + norm_x_, y + norm_y_, norm_w_, norm_h_));
  // area^2 * variance, exact in integers.
  const auto spread = area * sq - s * s;
  if (spread <= 0) return std::nullopt;
  const double a_sigma = std::sqrt(static_cast<double>(spread));
  if (a_sigma < min_stddev_ * static_cast<double>(area)) return std::nullopt;
  return 1.0 / a_sigma;
}

double ScaledCascade::feature_value(const IntegralImage& ii, int x, int y, int feature, double norm) const {
  double v = 0.0;
  for (const auto& r : features_[static_cast<std::size_t>(feature)]) {
    v += r.weight * static_cast<double>(ii.rect_sum(x + r.x, y + r.y, r.w, r.h));
  }
  return v * norm;
}

double ScaledCascade::stage_sum(const IntegralImage& ii, int x, int y, std::size_t stage, double norm) const {
  double sum = 0.0;
  for (const auto& wc : cascade_->stages[stage].weak) {
    int idx = 0;
    do {
      const auto& node = wc.nodes[static_cast<std::size_t>(idx)];
      idx = feature_value(ii, x, y, node.feature, norm) < node.threshold ? node.left : node.right;
    } while (idx > 0);
    sum += wc.leaves[static_cast<std::size_t>(-idx)];
  }
  return sum;
}

WindowResult ScaledCascade::evaluate(const IntegralImage& ii, int x, int y) const {
  WindowResult res;
  const auto norm = norm_factor(ii, x, y);
  if (!norm) return res;
  const auto& stages = cascade_->stages;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const double sum = stage_sum(ii, x, y, s, *norm);
    res.stages_evaluated = s + 1;
    if (sum < stages[s].threshold) return res;
    res.score = sum - stages[s].threshold;
  }
  res.passed = true;
  return res;
}

std::vector<double> pyramid_scales(const HaarCascade& cascade, int image_w, int image_h, const DetectParams& params) {
  std::vector<double> scales;
  for (int k = 0;; ++k) {
    const double s = std::pow(params.scale_factor, k);
    const int w = static_cast<int>(std::lround(cascade.window_w * s));
    const int h = static_cast<int>(std::lround(cascade.window_h * s));
    if (w > image_w || h > image_h) break;
    if (params.max_size > 0 && (w > params.max_size || h > params.max_size)) break;
    if (std::min(w, h) >= params.min_size) scales.push_back(s);
    if (params.scale_factor == 1.0) break;
  }
  return scales;
}

std::vector<Detection> scan_windows(const HaarCascade& cascade, const IntegralImage& ii, const DetectParams& params,
                                    Exec exec) {
  validate(params);
  std::vector<Detection> out;
  for (const double s : pyramid_scales(cascade, ii.width(), ii.height(), params)) {
    const ScaledCascade scaled(cascade, s, params.min_stddev);
    const int step = std::max(1, static_cast<int>(std::lround(params.step * s)));
    const int ww = scaled.window_w();
    const int wh = scaled.window_h();
    const int rows = (ii.height() - wh) / step + 1;
    const int cols = (ii.width() - ww) / step + 1;

    // Each row fills its own bucket; concatenating buckets in row order keeps
    // the output identical to the serial scan.
    std::vector<std::vector<Detection>> buckets(static_cast<std::size_t>(rows));
    const auto scan_row = [&](int row) {
      const int y = row * step;
      auto& bucket = buckets[static_cast<std::size_t>(row)];
      for (int col = 0; col < cols; ++col) {
        const int x = col * step;
        const auto res = scaled.evaluate(ii, x, y);
        if (res.passed) bucket.push_back({x, y, ww, wh, res.score});
      }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (int row = 0; row < rows; ++row) scan_row(row);
    } else {
      for (int row = 0; row < rows; ++row) scan_row(row);
    }
    for (auto& b : buckets) out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

namespace {

bool similar(const Detection& a, const Detection& b, double eps) {
  const double delta = eps * (std::min(a.w, b.w) + std::min(a.h, b.h)) * 0.5;
  return std::abs(a.x - b.x) <= delta && std::abs(a.y - b.y) <= delta &&
         std::abs(a.x + a.w - b.x - b.w) <= delta && std::abs(a.y + a.h - b.y - b.h) <= delta;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<Detection> group_detections(std::span<const Detection> raw, int min_neighbors, double eps) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (similar(raw[i], raw[j], eps)) {
        const auto a = find_root(parent, i);
        const auto b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  // Clusters numbered by first appearance in the raw list.
  struct Group {
    double x = 0, y = 0, w = 0, h = 0;
    int count = 0;
    double score = -INFINITY;
  };
  std::vector<Group> groups;
  std::vector<std::size_t> label_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find_root(parent, i);
    if (label_of_root[root] == n) {
      label_of_root[root] = groups.size();
      groups.emplace_back();
    }
    auto& g = groups[label_of_root[root]];
    g.x += raw[i].x;
    g.y += raw[i].y;
    g.w += raw[i].w;
    g.h += raw[i].h;
    g.count += 1;
    g.score = std::max(g.score, raw[i].score);
  }

  std::vector<Detection> averaged;
  std::vector<int> counts;
  for (const auto& g : groups) {
    const double inv = 1.0 / g.count;
    averaged.push_back({static_cast<int>(std::lround(g.x * inv)), static_cast<int>(std::lround(g.y * inv)),
                        static_cast<int>(std::lround(g.w * inv)), static_cast<int>(std::lround(g.h * inv)), g.score});
    counts.push_back(g.count);
  }

  std::vector<Detection> out;
  for (std::size_t i = 0; i < averaged.size(); ++i) {
    if (counts[i] <= min_neighbors) continue;
    const auto& r1 = averaged[i];
    bool nested = false;
    for (std::size_t j = 0; j < averaged.size() && !nested; ++j) {
      if (j == i || counts[j] <= min_neighbors) continue;
      const auto& r2 = averaged[j];
      const int dx = static_cast<int>(std::lround(r2.w * eps));
      const int dy = static_cast<int>(std::lround(r2.h * eps));
      nested = r1.x >= r2.x - dx && r1.y >= r2.y - dy && r1.x + r1.w <= r2.x + r2.w + dx &&
               r1.y + r1.h <= r2.y + r2.h + dy && (counts[j] > std::max(3, counts[i]) || counts[i] < 3);
    }
    if (!nested) out.push_back(r1);
  }
  return out;
}

std::vector<Detection> detect_objects(const HaarCascade& cascade, const GrayImage& img, const DetectParams& params,
                                      Exec exec) {
  if (img.width < cascade.window_w || img.height < cascade.window_h) {
    throw Error(Errc::ImageSmallerThanWindow, std::to_string(img.width) + "x" + std::to_string(img.height) +
                                                  " image is smaller than the " + std::to_string(cascade.window_w) +
                                                  "x" + std::to_string(cascade.window_h) + " detection window");
  }
  const IntegralImage ii(img);
  const auto raw = scan_windows(cascade, ii, params, exec);
  return group_detections(raw, params.min_neighbors, params.group_eps);
}

std::optional<Detection> largest(std::span<const Detection> detections) {
  std::optional<Detection> best;
  for (const auto& d : detections) {
    if (!best || static_cast<long>(d.w) * d.h > static_cast<long>(best->w) * best->h) best = d;
  }
  return best;
}

io::EyeState classify_eye_state(const GrayImage& frame, const Detection& face, const HaarCascade& eye_cascade,
                                const DetectParams& params, const io::WarningSink& on_warning) {
  if (face.w <= 0 || face.h <= 0) {
    if (on_warning) on_warning("degenerate face box; reporting eyes closed");
    return io::EyeState::Closed;
  }
  const int roi_h = static_cast<int>(std::lround(face.h * 0.55));
  const auto roi = crop(frame, face.x, face.y, face.w, roi_h);
  if (roi.width < eye_cascade.window_w || roi.height < eye_cascade.window_h) return io::EyeState::Closed;
  const auto eyes = detect_objects(eye_cascade, roi, params, Exec::Serial);
  return eyes.empty() ? io::EyeState::Closed : io::EyeState::Open;
}

FrameAnalysis analyze_frame(const GrayImage& frame, const HaarCascade& face_cascade, const HaarCascade& eye_cascade,
                            const DetectParams& face_params, const DetectParams& eye_params) {
  FrameAnalysis out;
  if (frame.width < face_cascade.window_w || frame.height < face_cascade.window_h) return out;
  const auto faces = detect_objects(face_cascade, frame, face_params, Exec::Serial);
  out.face = largest(faces);
  if (out.face) out.state = classify_eye_state(frame, *out.face, eye_cascade, eye_params);
  return out;
}

std::vector<FrameAnalysis> analyze_frames(std::span<const std::string> paths, const HaarCascade& face_cascade,
                                          const HaarCascade& eye_cascade, const DetectParams& face_params,
                                          const DetectParams& eye_params, Exec exec) {
  validate(face_params);
  validate(eye_params);
  std::vector<FrameAnalysis> out(paths.size());
  std::vector<std::exception_ptr> errors(paths.size());
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
  const auto one = [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = analyze_frame(read_image(paths[k]), face_cascade, eye_cascade, face_params, eye_params);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  }
  // Exceptions cannot leave an OpenMP region; rethrow the first one here.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace vigil::vision
