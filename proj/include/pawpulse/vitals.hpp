#pragma once

// Heart-rate and SpO2 estimation and the per-tick main loop.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "pawpulse/dsp.hpp"
#include "pawpulse/signal_core.hpp"

namespace pawpulse::vitals {

struct BeatDetectorState {
  std::optional<std::uint32_t> last_beat_time_ms;
  std::uint32_t refractory_until_ms = 0;
  double adaptive_threshold = 0.0;
  /// Most recent gated BPM values, oldest first, at most avg_window_beats.
  std::deque<double> recent_bpm;

  // Peak tracker and one-sample lookbehind for local-maximum detection.
  double rolling_peak = 0.0;
  std::optional<std::uint32_t> peak_time_ms;
  struct Pending {
    std::uint32_t timestamp_ms;
    double value;
    double threshold;
    bool eligible;
    bool rising;  // strictly above the sample before it

    bool operator==(const Pending&) const = default;
  };
  std::optional<Pending> pending;

  bool operator==(const BeatDetectorState&) const = default;
};

struct BeatDetection {
  std::vector<BeatEvent> events;
  BeatDetectorState state;
};

/// Adaptive-threshold peak picking on ac_ir. A sample becomes a beat when it
/// is a local maximum, exceeds threshold_fraction times the decayed rolling
/// peak, lies past the refractory window and is not outlier-flagged. Samples
/// whose baseline drops below the contact threshold reset the detector.
BeatDetection detect_beats(std::span<const dsp::AcSample> samples, BeatDetectorState state,
                           const PipelineConfig& config);

/// (cur_ms - prev_ms) / 1000. OrderError unless cur_ms > prev_ms.
double beat_interval(std::uint32_t prev_ms, std::uint32_t cur_ms);

/// 60 / delta_t_s. DomainError unless delta_t_s > 0.
double instantaneous_bpm(double delta_t_s);

/// Stores `bpm` (evicting the oldest beyond avg_window_beats) iff it lies in
/// the inclusive valid range; otherwise returns the state unchanged.
BeatDetectorState accept_bpm(double bpm, BeatDetectorState state, const PipelineConfig& config);

std::optional<double> rolling_average_bpm(const BeatDetectorState& state);

struct RatioWindow {
  std::uint32_t window_ms = 1000;
  double mean_red = 0.0;
  double mean_ir = 0.0;
  std::uint32_t sample_count = 0;
};

/// Means of raw red and IR over the frames, as a window of `window_ms`.
RatioWindow make_ratio_window(std::span<const SampleFrame> frames, std::uint32_t window_ms);

/// mean_red / mean_ir. EmptyWindow with no samples, DivisionGuard if mean_ir is 0.
double compute_ratio(const RatioWindow& window);

/// a - b * ratio, unclamped.
double spo2_estimate(double ratio, const CalibrationCoeffs& coeffs);

/// max(0, min(100, raw)).
double clamp_spo2(double raw);

/// Streaming per-stream state for the main loop. Copyable, so a snapshot can
/// be resumed or compared; never share one instance between streams.
class VitalsPipeline {
 public:
  explicit VitalsPipeline(PipelineConfig config);

  /// Consumes the frames received since the previous tick and reports the
  /// vitals as of `tick_time_ms`. Frames must be ordered and validated.
  VitalsEstimate process_tick(std::span<const SampleFrame> frames, std::uint32_t tick_time_ms);

  const PipelineConfig& config() const { return config_; }
  const BeatDetectorState& beat_state() const { return beats_; }
  /// Every beat detected so far, in order.
  const std::vector<BeatEvent>& beat_log() const { return beat_log_; }

 private:
  PipelineConfig config_;
  dsp::Preprocessor pre_;
  BeatDetectorState beats_;
  std::vector<BeatEvent> beat_log_;
  std::deque<SampleFrame> ratio_frames_;
};

/// Frames grouped into one tick: those with timestamps in
/// [tick_time_ms - interval, tick_time_ms).
struct Tick {
  std::uint32_t tick_time_ms = 0;
  std::vector<SampleFrame> frames;
};

/// Splits a frame stream into ticks of signal time. Gaps produce empty ticks.
class TickScheduler {
 public:
  explicit TickScheduler(std::uint32_t interval_ms);

  /// Returns ticks completed by the arrival of `frame`, oldest first.
  std::vector<Tick> push(const SampleFrame& frame);
  /// Returns the final partially filled tick, if it holds any frames.
  std::optional<Tick> finish();

 private:
  std::uint32_t interval_ms_;
  std::optional<Tick> current_;
};

/// Runs the whole stream through a scheduler and pipeline. Frames are
/// validated first; the return holds one estimate per tick.
std::vector<VitalsEstimate> run_pipeline(std::span<const SampleFrame> frames,
                                         const PipelineConfig& config);

}  // namespace pawpulse::vitals
