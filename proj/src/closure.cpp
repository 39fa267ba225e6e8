#include <algorithm>

#include "text.hpp"
#include "vigil/error.hpp"
#include "vigil/vision.hpp"

namespace vigil::vision {

Level video_level(double closure_seconds, double t_alert) {
  if (closure_seconds <= 0.0) return Level::Alert;
  if (closure_seconds < t_alert) return Level::Moderate;
  return Level::Drowsy;
}

ClosureTracker::ClosureTracker(double t_alert, double perclos_window) : t_alert_(t_alert), window_(perclos_window) {
  if (!(t_alert > 0.0)) throw Error(Errc::InvalidConfig, "t_alert must be positive");
  if (!(perclos_window > 0.0)) throw Error(Errc::InvalidConfig, "PERCLOS window must be positive");
}

ClosureUpdate ClosureTracker::update(double timestamp, io::EyeState state) {
  if (last_timestamp_ && timestamp < *last_timestamp_) {
    throw Error(Errc::TimestampRegression, "timestamp " + detail::format_double(timestamp) + " precedes " +
                                               detail::format_double(*last_timestamp_));
  }
  last_timestamp_ = timestamp;

  if (history_.empty() || history_.back().state != state) history_.push_back({timestamp, state});
  if (state == io::EyeState::Closed) {
    if (!closure_start_) closure_start_ = timestamp;
  } else {
    closure_start_.reset();
  }
  state_ = state;

  // Keep the entry in force at the start of the window, drop older ones.
  const double horizon = timestamp - window_;
  while (history_.size() >= 2 && history_[1].timestamp <= horizon) history_.pop_front();

  ClosureUpdate out;
  out.closure_seconds = closure_start_ ? timestamp - *closure_start_ : 0.0;
  out.perclos = perclos(timestamp);
  out.video_level = video_level(out.closure_seconds, t_alert_);
  return out;
}

double ClosureTracker::perclos(double now) const {
  const double start = std::max(history_.front().timestamp, now - window_);
  const double span = now - start;
  if (!(span > 0.0)) return 0.0;
  double closed = 0.0;
  for (std::size_t i = 0; i < history_.size(); ++i) {
    if (history_[i].state != io::EyeState::Closed) continue;
    const double a = std::max(history_[i].timestamp, start);
    const double b = i + 1 < history_.size() ? history_[i + 1].timestamp : now;
    if (b > a) closed += b - a;
  }
  return std::clamp(closed / span, 0.0, 1.0);
}

}  // namespace vigil::vision
