#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/exec.hpp"
#include "vigil/level.hpp"
#include "vigil/signal_io.hpp"

namespace vigil::vision {

// ---------------------------------------------------------------------------
// Images

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const { return width <= 0 || height <= 0; }
};

// Binary (P5) or ASCII (P2) PGM with maxval <= 255. Throws Error(ImageFormat).
GrayImage decode_pgm(std::string_view bytes);
std::string encode_pgm(const GrayImage& img);

// .pgm is decoded natively; .png goes through libpng when the build has it.
GrayImage read_image(const std::string& path);

// *.pgm / *.png files in `dir`, lexicographic order.
std::vector<std::string> list_frames(const std::string& dir);

// Sub-image clipped to the image bounds (may come back empty).
GrayImage crop(const GrayImage& img, int x, int y, int w, int h);

// ---------------------------------------------------------------------------
// Integral image

// (width+1) x (height+1) tables of pixel and squared-pixel sums above and to
// the left of each entry; row 0 and column 0 are zero.
class IntegralImage {
 public:
  // Throws Error(EmptyImage).
  explicit IntegralImage(const GrayImage& img);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint64_t at(int x, int y) const { return sum_[index(x, y)]; }
  std::uint64_t sq_at(int x, int y) const { return sq_[index(x, y)]; }

  // Sum over the w x h rectangle with top-left (x, y), four lookups.
  std::uint64_t rect_sum(int x, int y, int w, int h) const {
    return at(x + w, y + h) - at(x, y + h) - at(x + w, y) + at(x, y);
  }
  std::uint64_t rect_sq_sum(int x, int y, int w, int h) const {
    return sq_at(x + w, y + h) - sq_at(x, y + h) - sq_at(x + w, y) + sq_at(x, y);
  }

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * (width_ + 1) + x; }

  int width_;
  int height_;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sq_;
};

// ---------------------------------------------------------------------------
// Cascade model

struct HaarRect {
  int x = 0, y = 0, w = 0, h = 0;
  double weight = 0.0;
};

struct HaarFeature {
  std::vector<HaarRect> rects;
};

// Split node: go left when feature value < threshold. A child index <= 0
// names leaf -child.
struct TreeNode {
  int left = 0;
  int right = 0;
  int feature = 0;
  double threshold = 0.0;
};

struct WeakClassifier {
  std::vector<TreeNode> nodes;
  std::vector<double> leaves;
};

struct Stage {
  double threshold = 0.0;
  std::vector<WeakClassifier> weak;
};

struct HaarCascade {
  int window_w = 0;
  int window_h = 0;
  std::vector<Stage> stages;
  std::vector<HaarFeature> features;

  std::size_t weak_count() const;
};

// Parses the stump/tree cascade XML (<cascade> with stageThreshold,
// internalNodes, leafValues and feature rects). Numbers are read exactly as
// written. Throws Error(SchemaError) with the offending element path,
// Error(RectOutOfWindow), or Error(NotStumpBased) for trees deeper than 2.
HaarCascade parse_cascade_xml(std::string_view xml);

HaarCascade load_cascade(const std::string& path);

// ---------------------------------------------------------------------------
// Detection

struct Detection {
  int x = 0, y = 0, w = 0, h = 0;
  double score = 0.0;  // last stage sum minus its threshold

  bool operator==(const Detection&) const = default;
};

struct DetectParams {
  double scale_factor = 1.1;  // >= 1.05 (1.0 allowed only for single-scale scans)
  int step = 2;               // base-scale stride in pixels, grows with the scale
  int min_size = 0;           // smallest window side scanned, 0 = base window
  int max_size = 0;           // largest window side scanned, 0 = unbounded
  int min_neighbors = 3;      // a group survives with more than this many raw hits
  double group_eps = 0.2;     // relative overlap tolerance for grouping
  double min_stddev = 1.0;    // windows flatter than this (grey levels) are rejected
};

// Throws Error(InvalidConfig).
void validate(const DetectParams& params);

struct WindowResult {
  bool passed = false;
  std::size_t stages_evaluated = 0;  // 0 when the variance guard rejected the window
  double score = 0.0;
};

// The cascade resized to one pyramid scale: rects rounded to the scaled
// window with the first rect's weight re-balanced so each feature stays
// zero-sum, plus the inset variance-normalization rectangle.
class ScaledCascade {
 public:
  ScaledCascade(const HaarCascade& cascade, double scale, double min_stddev = 1.0);

  int window_w() const { return win_w_; }
  int window_h() const { return win_h_; }
  double scale() const { return scale_; }
  std::size_t stage_count() const { return cascade_->stages.size(); }

  // 1 / (A * sigma) over the normalization rect, or nullopt when the window
  // is flatter than min_stddev.
  std::optional<double> norm_factor(const IntegralImage& ii, int x, int y) const;

  // Normalized feature response for the window at (x, y).
  double feature_value(const IntegralImage& ii, int x, int y, int feature, double norm) const;

  // Sum of leaf values of one stage.
  double stage_sum(const IntegralImage& ii, int x, int y, std::size_t stage, double norm) const;

  // Staged evaluation; stops at the first failing stage.
  WindowResult evaluate(const IntegralImage& ii, int x, int y) const;

 private:
  struct ScaledRect {
    int x, y, w, h;
    double weight;
  };

  const HaarCascade* cascade_;
  double scale_;
  double min_stddev_;
  int win_w_, win_h_;
  int norm_x_, norm_y_, norm_w_, norm_h_;
  std::vector<std::vector<ScaledRect>> features_;
};

// Scales visited by the pyramid for an image of the given size.
std::vector<double> pyramid_scales(const HaarCascade& cascade, int image_w, int image_h, const DetectParams& params);

// Every window that passes all stages, before grouping, in (scale, y, x) order.
std::vector<Detection> scan_windows(const HaarCascade& cascade, const IntegralImage& ii, const DetectParams& params,
                                    Exec exec = Exec::Parallel);

// Clusters similar rectangles, drops clusters with <= min_neighbors members,
// averages the rest and removes groups nested inside stronger ones.
std::vector<Detection> group_detections(std::span<const Detection> raw, int min_neighbors, double eps);

// Throws Error(ImageSmallerThanWindow).
std::vector<Detection> detect_objects(const HaarCascade& cascade, const GrayImage& img, const DetectParams& params = {},
                                      Exec exec = Exec::Parallel);

// Largest-area detection (first one on ties).
std::optional<Detection> largest(std::span<const Detection> detections);

// OPEN when the eye cascade fires in the upper 55% of the face box. A
// degenerate face box yields CLOSED and a warning.
io::EyeState classify_eye_state(const GrayImage& frame, const Detection& face, const HaarCascade& eye_cascade,
                                const DetectParams& params = {}, const io::WarningSink& on_warning = {});

struct FrameAnalysis {
  io::EyeState state = io::EyeState::Closed;
  std::optional<Detection> face;
};

// Largest face, then eye state. A frame without a face counts as CLOSED.
FrameAnalysis analyze_frame(const GrayImage& frame, const HaarCascade& face_cascade, const HaarCascade& eye_cascade,
                            const DetectParams& face_params = {}, const DetectParams& eye_params = {});

// Per-frame analysis over a frame list, frames processed in parallel.
std::vector<FrameAnalysis> analyze_frames(std::span<const std::string> paths, const HaarCascade& face_cascade,
                                          const HaarCascade& eye_cascade, const DetectParams& face_params = {},
                                          const DetectParams& eye_params = {}, Exec exec = Exec::Parallel);

// ---------------------------------------------------------------------------
// Eye closure

// 0 when T == 0, 1 when 0 < T < t_alert, 2 otherwise.
Level video_level(double closure_seconds, double t_alert = 3.0);

struct ClosureUpdate {
  double closure_seconds = 0.0;  // running closure duration T
  double perclos = 0.0;          // closed-time fraction over the trailing window
  Level video_level = Level::Alert;
};

class ClosureTracker {
 public:
  explicit ClosureTracker(double t_alert = 3.0, double perclos_window = 60.0);

  // Reports the state observed at `timestamp`; it holds until the next update.
  // Throws Error(TimestampRegression) when time runs backwards.
  ClosureUpdate update(double timestamp, io::EyeState state);

  io::EyeState current_state() const { return state_; }
  std::optional<double> closure_start() const { return closure_start_; }

 private:
  struct Entry {
    double timestamp;
    io::EyeState state;
  };

  double perclos(double now) const;

  double t_alert_;
  double window_;
  io::EyeState state_ = io::EyeState::Open;
  std::optional<double> closure_start_;
  std::optional<double> last_timestamp_;
  std::deque<Entry> history_;
};

}  // namespace vigil::vision
