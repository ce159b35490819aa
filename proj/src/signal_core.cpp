#include "pawpulse/signal_core.hpp"

#include <cmath>
#include <string>

#include "pawpulse/errors.hpp"

namespace pawpulse {

SampleFrame validate_frame(const SampleFrame& frame,
                           const std::optional<SampleFrame>& previous) {
  if (frame.red > kAdcMax || frame.ir > kAdcMax) {
    throw RangeError("sample at t=" + std::to_string(frame.timestamp_ms) +
                     " ms exceeds the 18-bit ADC range");
  }
  if (previous && frame.timestamp_ms <= previous->timestamp_ms) {
    throw OrderError("timestamp " + std::to_string(frame.timestamp_ms) +
                     " ms does not follow " + std::to_string(previous->timestamp_ms) + " ms");
  }
  return frame;
}

std::string_view to_string(ContactState c) {
  return c == ContactState::Contact ? "contact" : "no_contact";
}

VitalsEstimate VitalsEstimate::no_contact(std::uint32_t tick_time_ms) {
  VitalsEstimate v;
  v.tick_time_ms_ = tick_time_ms;
  v.contact_ = ContactState::NoContact;
  return v;
}

VitalsEstimate VitalsEstimate::with_contact(std::uint32_t tick_time_ms,
                                            std::optional<double> bpm_instant,
                                            std::optional<double> bpm_avg,
                                            std::optional<double> spo2_pct,
                                            std::optional<double> temperature_c) {
  if (spo2_pct && !(*spo2_pct >= 0.0 && *spo2_pct <= 100.0)) {
    throw RangeError("SpO2 " + std::to_string(*spo2_pct) + " outside [0, 100]");
  }
  for (auto bpm : {bpm_instant, bpm_avg}) {
    if (bpm && !(std::isfinite(*bpm) && *bpm > 0.0)) {
      throw RangeError("BPM must be positive and finite");
    }
  }
  VitalsEstimate v;
  v.tick_time_ms_ = tick_time_ms;
  v.contact_ = ContactState::Contact;
  v.bpm_instant_ = bpm_instant;
  v.bpm_avg_ = bpm_avg;
  v.spo2_pct_ = spo2_pct;
  v.temperature_c_ = temperature_c;
  return v;
}

CalibrationCoeffs::CalibrationCoeffs(double a, double b) : a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigError("calibration coefficients must be finite");
  }
  if (!(b > 0.0)) {
    throw ConfigError("calibration coefficient b must be positive, got " + std::to_string(b));
  }
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "sample_rate_hz must be positive");
  require(std::isfinite(bpm_valid_min) && std::isfinite(bpm_valid_max) && bpm_valid_min > 0.0,
          "BPM bounds must be finite and positive");
  require(bpm_valid_min < bpm_valid_max, "bpm_valid_min must be below bpm_valid_max");
  require(avg_window_beats >= 1, "avg_window_beats must be at least 1");
  require(tick_interval_ms >= 1, "tick_interval_ms must be at least 1");
  require(std::isfinite(dc_window_s) && dc_window_s * sample_rate_hz >= 1.0,
          "dc_window_s must span at least one sample");
  require(smooth_kernel >= 1 && smooth_kernel % 2 == 1, "smooth_kernel must be odd and positive");
  require(std::isfinite(outlier_z) && outlier_z > 0.0, "outlier_z must be positive");
  require(std::isfinite(outlier_window_s) && outlier_window_s * sample_rate_hz >= 1.0,
          "outlier_window_s must span at least one sample");
  require(std::isfinite(threshold_fraction) && threshold_fraction > 0.0 && threshold_fraction < 1.0,
          "threshold_fraction must lie in (0, 1)");
  require(std::isfinite(peak_half_life_ms) && peak_half_life_ms > 0.0,
          "peak_half_life_ms must be positive");
  require(ratio_window_ms >= 1, "ratio_window_ms must be at least 1");
}

}  // namespace pawpulse
