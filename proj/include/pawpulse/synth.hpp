#pragma once

// Synthetic red/IR pulse streams with known heart rate and SpO2.
//
// Each cardiac cycle is the sum of two Gaussians: a systolic peak at 0.20 of
// the cycle and a dicrotic bump at 0.45 of the cycle with 30% of the systolic
// amplitude. The systolic peak time is the ground-truth beat time. The red
// channel is the IR channel scaled by the ratio that the configured
// calibration maps to the target SpO2, so R/IR reproduces it exactly.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse::synth {

/// Heart rate held from `start_ms` until the next segment starts.
struct BpmSegment {
  std::uint32_t start_ms = 0;
  double bpm = 60.0;
};

struct SynthProfile {
  std::vector<BpmSegment> bpm_schedule{{0, 60.0}};
  double true_spo2_pct = 97.0;
  double dc_ir = 120'000.0;
  /// Red baseline. Derived from the target SpO2 when absent; when given it
  /// must agree with the derived value to within 0.1%.
  std::optional<double> dc_red;
  double ac_amplitude_fraction = 0.02;
  double noise_std_counts = 0.0;
  std::uint64_t seed = 1;
  std::optional<double> temperature_c;

  static SynthProfile constant(double bpm, double spo2_pct, std::uint64_t seed = 1);

  /// Throws ConfigError when any field is outside its allowed range.
  void validate() const;
};

struct GroundTruth {
  std::vector<std::uint32_t> beat_times_ms;
  std::vector<std::pair<std::uint32_t, double>> spo2_schedule;
};

struct SynthOutput {
  std::vector<SampleFrame> frames;
  GroundTruth truth;
};

/// Emits floor(duration_s * fs_hz) frames spaced 1/fs_hz apart. Deterministic
/// for a fixed profile seed. `coeffs` is the calibration the estimator will
/// use; the red/IR ratio is its inverse at the target SpO2.
SynthOutput generate(const SynthProfile& profile, double duration_s, double fs_hz,
                     const CalibrationCoeffs& coeffs = kDefaultCoeffs);

/// Pulse-only value in [0, ~1.06] at `phase` cycles after a cycle start.
double pulse_shape(double phase_cycles);

/// R/IR ratio the calibration maps to `spo2_pct`.
double ratio_for_spo2(double spo2_pct, const CalibrationCoeffs& coeffs);

/// Noise standard deviation (counts) giving `snr_db` relative to the RMS of
/// the IR pulsatile component.
double noise_std_for_snr(const SynthProfile& profile, double snr_db);

enum class ArtifactKind { Dropout, MotionSpike };

/// Dropout zeroes both channels over [at_ms, at_ms + duration_ms). MotionSpike
/// adds a smooth excursion of 12x to 16x the channel's pulse amplitude over the
/// same window, with sign and scale drawn from `seed`.
std::vector<SampleFrame> inject_artifacts(std::vector<SampleFrame> frames, ArtifactKind kind,
                                          std::uint32_t at_ms, std::uint32_t duration_ms,
                                          std::uint64_t seed);

}  // namespace pawpulse::synth
