#include "pawpulse/vitals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pawpulse/errors.hpp"

namespace pawpulse::vitals {
namespace {

void reset_detector(BeatDetectorState& s) {
  s.last_beat_time_ms.reset();
  s.refractory_until_ms = 0;
  s.adaptive_threshold = 0.0;
  s.recent_bpm.clear();
  s.rolling_peak = 0.0;
  s.peak_time_ms.reset();
  s.pending.reset();
}

// One sample of peak picking. A candidate is confirmed one sample late, when
// the following sample shows it was a local maximum.
std::optional<BeatEvent> detect_step(const dsp::AcSample& sample, BeatDetectorState& s,
                                     const PipelineConfig& config) {
  if (dsp::contact_state(sample.dc_ir, config.contact_ir_threshold) == ContactState::NoContact) {
    reset_detector(s);
    return std::nullopt;
  }

  if (s.peak_time_ms) {
    const double elapsed = static_cast<double>(sample.timestamp_ms - *s.peak_time_ms);
    s.rolling_peak *= std::exp2(-elapsed / config.peak_half_life_ms);
  }
  s.peak_time_ms = sample.timestamp_ms;
  const double threshold = config.threshold_fraction * s.rolling_peak;

  std::optional<BeatEvent> beat;
  if (s.pending) {
    const auto& c = *s.pending;
    const bool local_max = c.rising && c.value >= sample.ac_ir;
    if (local_max && c.eligible && c.value > 0.0 && c.value > c.threshold &&
        c.timestamp_ms >= s.refractory_until_ms) {
      BeatEvent e;
      e.beat_time_ms = c.timestamp_ms;
      if (s.last_beat_time_ms) e.delta_t_s = beat_interval(*s.last_beat_time_ms, c.timestamp_ms);
      s.last_beat_time_ms = c.timestamp_ms;
      s.refractory_until_ms = c.timestamp_ms + config.refractory_ms;
      beat = e;
    }
  }

  const bool rising = s.pending && sample.ac_ir > s.pending->value;
  s.pending = BeatDetectorState::Pending{sample.timestamp_ms, sample.ac_ir, threshold,
                                         !sample.outlier, rising};
  if (!sample.outlier && sample.ac_ir > s.rolling_peak) s.rolling_peak = sample.ac_ir;
  s.adaptive_threshold = config.threshold_fraction * s.rolling_peak;
  return beat;
}

}  // namespace

BeatDetection detect_beats(std::span<const dsp::AcSample> samples, BeatDetectorState state,
                           const PipelineConfig& config) {
  BeatDetection out;
  for (const auto& sample : samples) {
    if (auto beat = detect_step(sample, state, config)) out.events.push_back(*beat);
  }
  out.state = std::move(state);
  return out;
}

double beat_interval(std::uint32_t prev_ms, std::uint32_t cur_ms) {
  if (cur_ms <= prev_ms) {
    throw OrderError("beat at " + std::to_string(cur_ms) + " ms does not follow beat at " +
                     std::to_string(prev_ms) + " ms");
  }
  return static_cast<double>(cur_ms - prev_ms) / 1000.0;
}

double instantaneous_bpm(double delta_t_s) {
  if (!(delta_t_s > 0.0)) throw DomainError("beat interval must be positive");
  return 60.0 / delta_t_s;
}

BeatDetectorState accept_bpm(double bpm, BeatDetectorState state, const PipelineConfig& config) {
  if (!(bpm >= config.bpm_valid_min && bpm <= config.bpm_valid_max)) return state;
  state.recent_bpm.push_back(bpm);
  while (state.recent_bpm.size() > config.avg_window_beats) state.recent_bpm.pop_front();
  return state;
}

std::optional<double> rolling_average_bpm(const BeatDetectorState& state) {
  if (state.recent_bpm.empty()) return std::nullopt;
  const double sum = std::accumulate(state.recent_bpm.begin(), state.recent_bpm.end(), 0.0);
  return sum / static_cast<double>(state.recent_bpm.size());
}

RatioWindow make_ratio_window(std::span<const SampleFrame> frames, std::uint32_t window_ms) {
  RatioWindow w;
  w.window_ms = window_ms;
  std::uint64_t red = 0;
  std::uint64_t ir = 0;
  for (const auto& f : frames) {
    red += f.red;
    ir += f.ir;
  }
  w.sample_count = static_cast<std::uint32_t>(frames.size());
  if (!frames.empty()) {
    w.mean_red = static_cast<double>(red) / static_cast<double>(frames.size());
    w.mean_ir = static_cast<double>(ir) / static_cast<double>(frames.size());
  }
  return w;
}

double compute_ratio(const RatioWindow& window) {
  if (window.sample_count == 0) throw EmptyWindow("ratio window holds no samples");
  if (!(window.mean_ir > 0.0)) throw DivisionGuard("mean IR is zero");
  return window.mean_red / window.mean_ir;
}

double spo2_estimate(double ratio, const CalibrationCoeffs& coeffs) {
  return coeffs.a() - coeffs.b() * ratio;
}

double clamp_spo2(double raw) { return std::max(0.0, std::min(100.0, raw)); }

VitalsPipeline::VitalsPipeline(PipelineConfig config)
    : config_((config.validate(), std::move(config))), pre_(config_) {}

VitalsEstimate VitalsPipeline::process_tick(std::span<const SampleFrame> frames,
                                            std::uint32_t tick_time_ms) {
  for (const auto& frame : frames) {
    ratio_frames_.push_back(frame);
    while (frame.timestamp_ms - ratio_frames_.front().timestamp_ms >= config_.ratio_window_ms) {
      ratio_frames_.pop_front();
    }
    for (const auto& sample : pre_.push(frame)) {
      auto beat = detect_step(sample, beats_, config_);
      if (!beat) continue;
      beat_log_.push_back(*beat);
      if (beat->delta_t_s) {
        beats_ = accept_bpm(instantaneous_bpm(*beat->delta_t_s), std::move(beats_), config_);
      }
    }
  }

  if (frames.empty() ||
      dsp::contact_state(pre_.latest_dc_ir(), config_.contact_ir_threshold) == ContactState::NoContact) {
    return VitalsEstimate::no_contact(tick_time_ms);
  }

  const std::vector<SampleFrame> window(ratio_frames_.begin(), ratio_frames_.end());
  std::optional<double> spo2;
  const auto ratio_window = make_ratio_window(window, config_.ratio_window_ms);
  if (ratio_window.sample_count > 0 && ratio_window.mean_ir > 0.0) {
    spo2 = clamp_spo2(spo2_estimate(compute_ratio(ratio_window), config_.coeffs));
  }

  std::optional<double> temperature;
  double temp_sum = 0.0;
  std::size_t temp_count = 0;
  for (const auto& f : window) {
    if (auto c = f.temperature_c()) {
      temp_sum += *c;
      ++temp_count;
    }
  }
  if (temp_count > 0) temperature = temp_sum / static_cast<double>(temp_count);

  std::optional<double> instant;
  if (!beats_.recent_bpm.empty()) instant = beats_.recent_bpm.back();
  return VitalsEstimate::with_contact(tick_time_ms, instant, rolling_average_bpm(beats_), spo2,
                                      temperature);
}

TickScheduler::TickScheduler(std::uint32_t interval_ms) : interval_ms_(interval_ms) {
  if (interval_ms == 0) throw ConfigError("tick interval must be at least 1 ms");
}

std::vector<Tick> TickScheduler::push(const SampleFrame& frame) {
  std::vector<Tick> done;
  auto tick_end_for = [&](std::uint32_t t) {
    return (static_cast<std::uint64_t>(t) / interval_ms_ + 1) * interval_ms_;
  };
  if (!current_) {
    current_ = Tick{static_cast<std::uint32_t>(tick_end_for(frame.timestamp_ms)), {}};
  }
  while (frame.timestamp_ms >= current_->tick_time_ms) {
    const std::uint32_t next = current_->tick_time_ms + interval_ms_;
    done.push_back(std::move(*current_));
    current_ = Tick{next, {}};
  }
  current_->frames.push_back(frame);
  return done;
}

std::optional<Tick> TickScheduler::finish() {
  std::optional<Tick> last;
  if (current_ && !current_->frames.empty()) last = std::move(current_);
  current_.reset();
  return last;
}

std::vector<VitalsEstimate> run_pipeline(std::span<const SampleFrame> frames,
                                         const PipelineConfig& config) {
  VitalsPipeline pipeline(config);
  TickScheduler scheduler(config.tick_interval_ms);
  std::vector<VitalsEstimate> out;
  std::optional<SampleFrame> previous;
  for (const auto& f : frames) {
    validate_frame(f, previous);
    previous = f;
    for (const auto& tick : scheduler.push(f)) {
      out.push_back(pipeline.process_tick(tick.frames, tick.tick_time_ms));
    }
  }
  if (auto tick = scheduler.finish()) {
    out.push_back(pipeline.process_tick(tick->frames, tick->tick_time_ms));
  }
  return out;
}

}  // namespace pawpulse::vitals
