#pragma once

// Preprocessing: baseline tracking, smoothing, outlier flagging, contact.
//
// Each stage exists as a streaming operator (one instance per stream) and as
// a batch function over a whole sequence. The batch functions run the
// streaming operators, so both paths produce identical samples.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse::dsp {

struct AcSample {
  std::uint32_t timestamp_ms = 0;
  double ac_red = 0.0;
  double ac_ir = 0.0;
  double dc_red = 0.0;
  double dc_ir = 0.0;
  bool outlier = false;

  bool operator==(const AcSample&) const = default;
};

/// Trailing moving average over (t - window, t]. Until a full window has been
/// seen this is the running mean of everything so far.
class DcTracker {
 public:
  explicit DcTracker(double window_s);

  AcSample push(const SampleFrame& frame);

 private:
  struct Entry {
    std::uint32_t timestamp_ms;
    std::uint32_t red;
    std::uint32_t ir;
  };
  double window_ms_;
  std::deque<Entry> window_;
  // Integer sums stay exact, so ac + dc reconstructs the raw value.
  std::uint64_t sum_red_ = 0;
  std::uint64_t sum_ir_ = 0;
};

/// Flags samples whose ac_ir deviates from the trailing median by more than
/// z * 1.4826 * MAD. A zero MAD flags nothing. Values pass through untouched.
class OutlierFlagger {
 public:
  OutlierFlagger(double z_threshold, double window_s);

  AcSample push(AcSample sample);

 private:
  double z_;
  double window_ms_;
  std::deque<std::pair<std::uint32_t, double>> window_;
  std::vector<double> scratch_;
};

/// Centered moving average of ac_* with edge truncation. Output lags input by
/// (kernel_width - 1) / 2 samples; `flush` drains the tail at end of stream.
class Smoother {
 public:
  explicit Smoother(std::uint32_t kernel_width);

  /// Returns the sample that became complete, if any.
  std::vector<AcSample> push(const AcSample& sample);
  std::vector<AcSample> flush();

 private:
  AcSample emit(std::size_t center) const;

  std::size_t half_;
  std::deque<AcSample> buffer_;
  // Index in the stream of buffer_.front(), and of the next sample to emit.
  std::size_t front_index_ = 0;
  std::size_t next_emit_ = 0;
  std::size_t seen_ = 0;
};

std::vector<AcSample> remove_dc(std::span<const SampleFrame> frames, double window_s);
std::vector<AcSample> smooth(std::span<const AcSample> samples, std::uint32_t kernel_width);
std::vector<AcSample> reject_outliers(std::span<const AcSample> samples, double z_threshold,
                                      double window_s = 3.0);

/// Contact iff dc_ir >= threshold.
ContactState contact_state(double dc_ir, std::uint32_t threshold);

/// The full preprocessing chain used by the pipeline: baseline removal,
/// outlier flagging on the unsmoothed AC, then smoothing.
class Preprocessor {
 public:
  explicit Preprocessor(const PipelineConfig& config);

  std::vector<AcSample> push(const SampleFrame& frame);
  std::vector<AcSample> flush();

  /// Baseline IR after the most recent frame; 0 before any frame.
  double latest_dc_ir() const { return latest_dc_ir_; }

 private:
  DcTracker dc_;
  OutlierFlagger outliers_;
  Smoother smoother_;
  double latest_dc_ir_ = 0.0;
};

}  // namespace pawpulse::dsp
