#include "pawpulse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pawpulse/errors.hpp"

namespace pawpulse::synth {
namespace {

constexpr double kSystolicPhase = 0.20;
constexpr double kSystolicWidth = 0.08;
constexpr double kDicroticOffset = 0.25;  // after the systolic peak, i.e. at 0.45 of the cycle
constexpr double kDicroticWidth = 0.14;
constexpr double kDicroticAmplitude = 0.30;
// Peak of the summed shape, used for ADC headroom checks.
constexpr double kShapePeak = 1.07;

double beat_pulse(double dt_s, double period_s) {
  const double s = dt_s / (kSystolicWidth * period_s);
  const double d = (dt_s - kDicroticOffset * period_s) / (kDicroticWidth * period_s);
  return std::exp(-0.5 * s * s) + kDicroticAmplitude * std::exp(-0.5 * d * d);
}

double bpm_at(const std::vector<BpmSegment>& schedule, double t_s) {
  double bpm = schedule.front().bpm;
  for (const auto& seg : schedule) {
    if (seg.start_ms / 1000.0 <= t_s) bpm = seg.bpm;
  }
  return bpm;
}

struct Beat {
  double time_s;
  double period_s;
};

std::vector<Beat> beat_train(const std::vector<BpmSegment>& schedule, double duration_s) {
  std::vector<Beat> beats;
  const double first_period = 60.0 / schedule.front().bpm;
  // Two cycles before the start so their tails shape the first samples.
  for (int k = 2; k >= 1; --k) {
    beats.push_back({(kSystolicPhase - k) * first_period, first_period});
  }
  double t = kSystolicPhase * first_period;
  while (true) {
    const double period = 60.0 / bpm_at(schedule, std::max(t, 0.0));
    beats.push_back({t, period});
    if (t > duration_s + 2.0 * period) break;
    t += period;
  }
  return beats;
}

std::uint32_t to_counts(double v) {
  return static_cast<std::uint32_t>(std::clamp(std::llround(v), 0LL, static_cast<long long>(kAdcMax)));
}

}  // namespace

SynthProfile SynthProfile::constant(double bpm, double spo2_pct, std::uint64_t seed) {
  SynthProfile p;
  p.bpm_schedule = {{0, bpm}};
  p.true_spo2_pct = spo2_pct;
  p.seed = seed;
  return p;
}

void SynthProfile::validate() const {
  if (bpm_schedule.empty() || bpm_schedule.front().start_ms != 0) {
    throw ConfigError("BPM schedule must start at 0 ms");
  }
  for (std::size_t i = 0; i < bpm_schedule.size(); ++i) {
    const auto& seg = bpm_schedule[i];
    if (!(seg.bpm >= 30.0 && seg.bpm <= 220.0)) {
      throw ConfigError("true BPM " + std::to_string(seg.bpm) + " outside [30, 220]");
    }
    if (i > 0 && seg.start_ms <= bpm_schedule[i - 1].start_ms) {
      throw ConfigError("BPM schedule start times must increase");
    }
  }
  if (!(true_spo2_pct >= 70.0 && true_spo2_pct <= 100.0)) {
    throw ConfigError("true SpO2 " + std::to_string(true_spo2_pct) + " outside [70, 100]");
  }
  if (!(ac_amplitude_fraction > 0.0 && ac_amplitude_fraction <= 0.1)) {
    throw ConfigError("AC amplitude fraction must lie in (0, 0.1]");
  }
  if (!(noise_std_counts >= 0.0) || !std::isfinite(noise_std_counts)) {
    throw ConfigError("noise standard deviation must be non-negative");
  }
  if (!(dc_ir > 0.0) || dc_ir * (1.0 + ac_amplitude_fraction * kShapePeak) > kAdcMax) {
    throw ConfigError("IR baseline must be positive and leave ADC headroom for the pulse");
  }
  if (dc_red && !(*dc_red > 0.0)) throw ConfigError("red baseline must be positive");
  if (temperature_c && !(*temperature_c > -100.0 && *temperature_c < 100.0)) {
    throw ConfigError("temperature outside the fixed-point range");
  }
}

double pulse_shape(double phase_cycles) {
  double v = 0.0;
  for (int k = -2; k <= 2; ++k) v += beat_pulse(phase_cycles - kSystolicPhase - k, 1.0);
  return v;
}

double ratio_for_spo2(double spo2_pct, const CalibrationCoeffs& coeffs) {
  return (coeffs.a() - spo2_pct) / coeffs.b();
}

double noise_std_for_snr(const SynthProfile& profile, double snr_db) {
  constexpr int kSteps = 10'000;
  double mean = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kSteps; ++i) {
    const double v = pulse_shape(static_cast<double>(i) / kSteps);
    mean += v;
    sq += v * v;
  }
  mean /= kSteps;
  const double shape_rms = std::sqrt(sq / kSteps - mean * mean);
  const double ac_rms = profile.dc_ir * profile.ac_amplitude_fraction * shape_rms;
  return ac_rms / std::pow(10.0, snr_db / 20.0);
}

SynthOutput generate(const SynthProfile& profile, double duration_s, double fs_hz,
                     const CalibrationCoeffs& coeffs) {
  profile.validate();
  if (!(duration_s > 0.0) || !(fs_hz > 0.0) || !std::isfinite(duration_s) || !std::isfinite(fs_hz)) {
    throw ConfigError("duration and sample rate must be positive");
  }
  if (fs_hz > 1000.0) throw ConfigError("sample rate above 1 kHz cannot be timestamped in ms");
  const auto count = static_cast<std::size_t>(std::floor(duration_s * fs_hz + 1e-9));
  if (count < 2) throw ConfigError("duration * sample rate must give at least 2 samples");

  const double ratio = ratio_for_spo2(profile.true_spo2_pct, coeffs);
  if (!(ratio > 0.0)) throw ConfigError("calibration maps the target SpO2 to a non-positive ratio");
  const double dc_red = ratio * profile.dc_ir;
  if (profile.dc_red && std::abs(*profile.dc_red - dc_red) > 1e-3 * dc_red) {
    throw ConfigError("red baseline " + std::to_string(*profile.dc_red) +
                      " disagrees with the target SpO2 (expected " + std::to_string(dc_red) + ")");
  }
  if (dc_red * (1.0 + profile.ac_amplitude_fraction * kShapePeak) > kAdcMax) {
    throw ConfigError("red channel would exceed the ADC range");
  }

  const auto beats = beat_train(profile.bpm_schedule, duration_s);
  std::mt19937_64 rng(profile.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = profile.noise_std_counts;
  const double f = profile.ac_amplitude_fraction;

  std::optional<std::int16_t> temperature;
  if (profile.temperature_c) {
    temperature = static_cast<std::int16_t>(std::lround(*profile.temperature_c * 10.0));
  }

  SynthOutput out;
  out.frames.reserve(count);
  std::size_t first_beat = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / fs_hz;
    while (first_beat + 1 < beats.size() && beats[first_beat].time_s < t - 3.0 * beats[first_beat].period_s) {
      ++first_beat;
    }
    double p = 0.0;
    for (std::size_t k = first_beat; k < beats.size(); ++k) {
      if (beats[k].time_s > t + 3.0 * beats[k].period_s) break;
      p += beat_pulse(t - beats[k].time_s, beats[k].period_s);
    }
    const double n_ir = sigma > 0.0 ? sigma * noise(rng) : 0.0;
    const double n_red = sigma > 0.0 ? sigma * noise(rng) : 0.0;
    SampleFrame frame;
    frame.timestamp_ms = static_cast<std::uint32_t>(std::llround(static_cast<double>(i) * 1000.0 / fs_hz));
    frame.ir = to_counts(profile.dc_ir * (1.0 + f * p) + n_ir);
    frame.red = to_counts(dc_red * (1.0 + f * p) + n_red);
    frame.temperature_dc = temperature;
    out.frames.push_back(frame);
  }

  for (const auto& b : beats) {
    if (b.time_s >= 0.0 && b.time_s < duration_s) {
      out.truth.beat_times_ms.push_back(static_cast<std::uint32_t>(std::llround(b.time_s * 1000.0)));
    }
  }
  out.truth.spo2_schedule = {{0, profile.true_spo2_pct}};
  return out;
}

std::vector<SampleFrame> inject_artifacts(std::vector<SampleFrame> frames, ArtifactKind kind,
                                          std::uint32_t at_ms, std::uint32_t duration_ms,
                                          std::uint64_t seed) {
  if (duration_ms == 0) return frames;
  if (frames.empty()) throw RangeError("cannot inject an artifact into an empty stream");
  const std::uint32_t spacing =
      frames.size() > 1 ? frames.back().timestamp_ms - frames[frames.size() - 2].timestamp_ms : 1;
  const std::uint64_t extent_end = static_cast<std::uint64_t>(frames.back().timestamp_ms) + spacing;
  if (at_ms < frames.front().timestamp_ms ||
      static_cast<std::uint64_t>(at_ms) + duration_ms > extent_end) {
    throw RangeError("artifact window [" + std::to_string(at_ms) + ", " +
                     std::to_string(static_cast<std::uint64_t>(at_ms) + duration_ms) +
                     ") ms exceeds the stream extent");
  }
  const std::uint64_t end_ms = static_cast<std::uint64_t>(at_ms) + duration_ms;
  auto in_window = [&](const SampleFrame& fr) {
    return fr.timestamp_ms >= at_ms && fr.timestamp_ms < end_ms;
  };

  if (kind == ArtifactKind::Dropout) {
    for (auto& fr : frames) {
      if (in_window(fr)) fr.red = fr.ir = 0;
    }
    return frames;
  }

  // Pulse amplitude per channel from the 5th..95th percentile spread.
  auto spread = [&](auto channel) {
    std::vector<std::uint32_t> v;
    v.reserve(frames.size());
    for (const auto& fr : frames) v.push_back(fr.*channel);
    std::sort(v.begin(), v.end());
    const auto lo = v[v.size() * 5 / 100];
    const auto hi = v[std::min(v.size() - 1, v.size() * 95 / 100)];
    return std::max(1.0, static_cast<double>(hi - lo));
  };
  const double amp_red = spread(&SampleFrame::red);
  const double amp_ir = spread(&SampleFrame::ir);

  std::mt19937_64 rng(seed);
  const double scale = std::uniform_real_distribution<double>(12.0, 16.0)(rng);
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;

  // Tukey window: flat top with raised-cosine ramps over 10% of each end.
  constexpr double kRamp = 0.1;
  const double pi = std::acos(-1.0);
  auto envelope = [&](double x) {
    if (x < kRamp) return 0.5 * (1.0 - std::cos(pi * x / kRamp));
    if (x > 1.0 - kRamp) return 0.5 * (1.0 - std::cos(pi * (1.0 - x) / kRamp));
    return 1.0;
  };
  for (auto& fr : frames) {
    if (!in_window(fr)) continue;
    const double x = (fr.timestamp_ms - at_ms + 0.5) / static_cast<double>(duration_ms);
    const double e = sign * scale * envelope(x);
    fr.red = to_counts(fr.red + e * amp_red);
    fr.ir = to_counts(fr.ir + e * amp_ir);
  }
  return frames;
}

}  // namespace pawpulse::synth
