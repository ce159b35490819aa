#include "pawpulse/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "pawpulse/errors.hpp"

namespace pawpulse::dsp {
namespace {

double median_in_place(std::vector<double>& v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

DcTracker::DcTracker(double window_s) : window_ms_(window_s * 1000.0) {
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw ConfigError("DC window must be positive");
  }
}

AcSample DcTracker::push(const SampleFrame& frame) {
  window_.push_back({frame.timestamp_ms, frame.red, frame.ir});
  sum_red_ += frame.red;
  sum_ir_ += frame.ir;
  while (static_cast<double>(frame.timestamp_ms) - window_.front().timestamp_ms >= window_ms_) {
    sum_red_ -= window_.front().red;
    sum_ir_ -= window_.front().ir;
    window_.pop_front();
  }
  const auto n = static_cast<double>(window_.size());
  AcSample s;
  s.timestamp_ms = frame.timestamp_ms;
  s.dc_red = static_cast<double>(sum_red_) / n;
  s.dc_ir = static_cast<double>(sum_ir_) / n;
  s.ac_red = static_cast<double>(frame.red) - s.dc_red;
  s.ac_ir = static_cast<double>(frame.ir) - s.dc_ir;
  return s;
}

OutlierFlagger::OutlierFlagger(double z_threshold, double window_s)
    : z_(z_threshold), window_ms_(window_s * 1000.0) {
  if (!(z_threshold > 0.0) || !std::isfinite(z_threshold)) {
    throw ConfigError("outlier z threshold must be positive");
  }
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw ConfigError("outlier window must be positive");
  }
}

AcSample OutlierFlagger::push(AcSample sample) {
  window_.emplace_back(sample.timestamp_ms, sample.ac_ir);
  while (static_cast<double>(sample.timestamp_ms) - window_.front().first >= window_ms_) {
    window_.pop_front();
  }
  scratch_.clear();
  for (const auto& [t, v] : window_) scratch_.push_back(v);
  const double med = median_in_place(scratch_);
  for (auto& v : scratch_) v = std::abs(v - med);
  const double mad = median_in_place(scratch_);
  sample.outlier = mad > 0.0 && std::abs(sample.ac_ir - med) > z_ * 1.4826 * mad;
  return sample;
}

Smoother::Smoother(std::uint32_t kernel_width) : half_((kernel_width - 1) / 2) {
  if (kernel_width == 0 || kernel_width % 2 == 0) {
    throw ConfigError("smoothing kernel width must be odd and positive, got " +
                      std::to_string(kernel_width));
  }
}

AcSample Smoother::emit(std::size_t center) const {
  const std::size_t lo = center >= half_ ? center - half_ : 0;
  const std::size_t hi = std::min(seen_ - 1, center + half_);
  double red = 0.0;
  double ir = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    red += buffer_[i - front_index_].ac_red;
    ir += buffer_[i - front_index_].ac_ir;
  }
  const auto n = static_cast<double>(hi - lo + 1);
  AcSample out = buffer_[center - front_index_];
  out.ac_red = red / n;
  out.ac_ir = ir / n;
  return out;
}

std::vector<AcSample> Smoother::push(const AcSample& sample) {
  buffer_.push_back(sample);
  ++seen_;
  std::vector<AcSample> out;
  if (seen_ > next_emit_ + half_) {
    out.push_back(emit(next_emit_));
    ++next_emit_;
    while (front_index_ + half_ < next_emit_) {
      buffer_.pop_front();
      ++front_index_;
    }
  }
  return out;
}

std::vector<AcSample> Smoother::flush() {
  std::vector<AcSample> out;
  while (next_emit_ < seen_) {
    out.push_back(emit(next_emit_));
    ++next_emit_;
  }
  return out;
}

std::vector<AcSample> remove_dc(std::span<const SampleFrame> frames, double window_s) {
  if (frames.empty()) throw EmptyStream("remove_dc needs at least one frame");
  DcTracker tracker(window_s);
  std::vector<AcSample> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(tracker.push(f));
  return out;
}

std::vector<AcSample> smooth(std::span<const AcSample> samples, std::uint32_t kernel_width) {
  Smoother smoother(kernel_width);
  std::vector<AcSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    for (auto& r : smoother.push(s)) out.push_back(r);
  }
  for (auto& r : smoother.flush()) out.push_back(r);
  return out;
}

std::vector<AcSample> reject_outliers(std::span<const AcSample> samples, double z_threshold,
                                      double window_s) {
  OutlierFlagger flagger(z_threshold, window_s);
  std::vector<AcSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(flagger.push(s));
  return out;
}

ContactState contact_state(double dc_ir, std::uint32_t threshold) {
  return dc_ir >= static_cast<double>(threshold) ? ContactState::Contact : ContactState::NoContact;
}

Preprocessor::Preprocessor(const PipelineConfig& config)
    : dc_(config.dc_window_s),
      outliers_(config.outlier_z, config.outlier_window_s),
      smoother_(config.smooth_kernel) {}

std::vector<AcSample> Preprocessor::push(const SampleFrame& frame) {
  AcSample s = dc_.push(frame);
  latest_dc_ir_ = s.dc_ir;
  return smoother_.push(outliers_.push(s));
}

std::vector<AcSample> Preprocessor::flush() { return smoother_.flush(); }

}  // namespace pawpulse::dsp
