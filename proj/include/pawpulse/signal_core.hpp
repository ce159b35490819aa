#pragma once

// Shared domain types for the red/IR vitals pipeline.

#include <cstdint>
#include <optional>
#include <string_view>

namespace pawpulse {

/// Sensor ADC width. Red and IR counts are 18-bit on the device.
inline constexpr std::uint32_t kAdcBits = 18;
inline constexpr std::uint32_t kAdcMax = (1u << kAdcBits) - 1;

/// One timestamped red/IR reading. Temperature is carried in tenths of a
/// degree Celsius when the collar reports it.
struct SampleFrame {
  std::uint32_t timestamp_ms = 0;
  std::uint32_t red = 0;
  std::uint32_t ir = 0;
  std::optional<std::int16_t> temperature_dc;

  std::optional<double> temperature_c() const {
    if (!temperature_dc) return std::nullopt;
    return *temperature_dc / 10.0;
  }

  bool operator==(const SampleFrame&) const = default;
};

/// Returns `frame` unchanged, or throws RangeError when a channel exceeds the
/// ADC width and OrderError when it does not follow `previous` in time.
SampleFrame validate_frame(const SampleFrame& frame,
                           const std::optional<SampleFrame>& previous = std::nullopt);

struct BeatEvent {
  std::uint32_t beat_time_ms = 0;
  /// Interval to the previous beat; absent for the first beat of a stream.
  std::optional<double> delta_t_s;

  bool operator==(const BeatEvent&) const = default;
};

enum class ContactState { Contact, NoContact };

std::string_view to_string(ContactState c);

/// Per-tick output of the pipeline. Only constructible through the two
/// factories, which enforce the SpO2 range and the no-contact rule.
class VitalsEstimate {
 public:
  static VitalsEstimate no_contact(std::uint32_t tick_time_ms);
  static VitalsEstimate with_contact(std::uint32_t tick_time_ms,
                                     std::optional<double> bpm_instant,
                                     std::optional<double> bpm_avg,
                                     std::optional<double> spo2_pct,
                                     std::optional<double> temperature_c = std::nullopt);

  std::uint32_t tick_time_ms() const { return tick_time_ms_; }
  std::optional<double> bpm_instant() const { return bpm_instant_; }
  std::optional<double> bpm_avg() const { return bpm_avg_; }
  std::optional<double> spo2_pct() const { return spo2_pct_; }
  std::optional<double> temperature_c() const { return temperature_c_; }
  ContactState contact() const { return contact_; }

  bool operator==(const VitalsEstimate&) const = default;

 private:
  VitalsEstimate() = default;

  std::uint32_t tick_time_ms_ = 0;
  std::optional<double> bpm_instant_;
  std::optional<double> bpm_avg_;
  std::optional<double> spo2_pct_;
  std::optional<double> temperature_c_;
  ContactState contact_ = ContactState::NoContact;
};

/// The A and B constants of SpO2 = A - B * Ratio. B must be positive.
class CalibrationCoeffs {
 public:
  CalibrationCoeffs(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }

  bool operator==(const CalibrationCoeffs&) const = default;

 private:
  double a_;
  double b_;
};

/// Placeholder coefficients. Not measured on any sensor; replace them with the
/// output of `fit_calibration` for real hardware.
inline const CalibrationCoeffs kDefaultCoeffs{110.0, 25.0};

struct PipelineConfig {
  double sample_rate_hz = 100.0;
  double bpm_valid_min = 30.0;
  double bpm_valid_max = 220.0;
  std::uint32_t avg_window_beats = 4;
  std::uint32_t contact_ir_threshold = 50'000;
  CalibrationCoeffs coeffs = kDefaultCoeffs;
  std::uint32_t tick_interval_ms = 1000;

  // Preprocessing.
  double dc_window_s = 3.0;
  std::uint32_t smooth_kernel = 5;
  double outlier_z = 6.0;
  double outlier_window_s = 3.0;

  // Beat detector.
  std::uint32_t refractory_ms = 250;
  double threshold_fraction = 0.6;
  double peak_half_life_ms = 2000.0;

  // SpO2 ratio window.
  std::uint32_t ratio_window_ms = 1000;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

}  // namespace pawpulse
