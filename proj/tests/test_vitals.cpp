#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "pawpulse/errors.hpp"
#include "pawpulse/synth.hpp"
#include "pawpulse/vitals.hpp"

using namespace pawpulse;
using namespace pawpulse::vitals;

namespace {

dsp::AcSample ac(std::uint32_t t, double v, bool outlier = false) {
  dsp::AcSample s;
  s.timestamp_ms = t;
  s.ac_ir = v;
  s.dc_ir = 100'000;
  s.dc_red = 60'000;
  s.outlier = outlier;
  return s;
}

BeatDetectorState with_recent(std::initializer_list<double> bpm) {
  BeatDetectorState s;
  s.recent_bpm = bpm;
  return s;
}

}  // namespace

TEST_CASE("beat_interval") {
  CHECK(beat_interval(1000, 1500) == 0.5);
  CHECK(beat_interval(0, 60'000) == 60.0);
  CHECK_THROWS_AS(beat_interval(500, 500), OrderError);
  CHECK_THROWS_AS(beat_interval(600, 500), OrderError);
}

TEST_CASE("instantaneous_bpm") {
  CHECK(instantaneous_bpm(0.5) == 120.0);
  CHECK(instantaneous_bpm(1.0) == 60.0);
  CHECK(instantaneous_bpm(0.25) == 240.0);
  CHECK_THROWS_AS(instantaneous_bpm(0.0), DomainError);
  CHECK_THROWS_AS(instantaneous_bpm(-1.0), DomainError);
}

TEST_CASE("instantaneous_bpm times the interval is 60") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dt(0.25, 2.0);
  for (int i = 0; i < 10'000; ++i) {
    const double d = dt(rng);
    CHECK(std::abs(instantaneous_bpm(d) * d - 60.0) <= 1e-9);
  }
}

TEST_CASE("accept_bpm gate") {
  const PipelineConfig config;
  CHECK(accept_bpm(80, {}, config).recent_bpm == std::deque<double>{80});
  CHECK(accept_bpm(240, with_recent({70}), config) == with_recent({70}));
  CHECK(accept_bpm(30, {}, config).recent_bpm == std::deque<double>{30});
  CHECK(accept_bpm(220, {}, config).recent_bpm == std::deque<double>{220});
  CHECK(accept_bpm(29.999, {}, config).recent_bpm.empty());
  CHECK(accept_bpm(std::nan(""), {}, config).recent_bpm.empty());
  CHECK(accept_bpm(90, with_recent({1, 2, 3, 4}), config).recent_bpm == std::deque<double>{2, 3, 4, 90});
}

TEST_CASE("recent_bpm never leaves the valid range") {
  PipelineConfig config;
  config.bpm_valid_min = 40;
  config.bpm_valid_max = 180;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> bpm(0.0, 400.0);
  BeatDetectorState s;
  for (int i = 0; i < 5000; ++i) {
    s = accept_bpm(bpm(rng), std::move(s), config);
    CHECK(s.recent_bpm.size() <= config.avg_window_beats);
    for (double v : s.recent_bpm) {
      CHECK(v >= 40.0);
      CHECK(v <= 180.0);
    }
  }
}

TEST_CASE("rolling_average_bpm") {
  CHECK(*rolling_average_bpm(with_recent({60, 62, 64})) == 62.0);
  CHECK_FALSE(rolling_average_bpm({}).has_value());
  CHECK(*rolling_average_bpm(with_recent({100})) == 100.0);
}

TEST_CASE("rolling average equals a brute-force mean of the window") {
  const PipelineConfig config;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bpm(30.0, 220.0);
  std::vector<double> history;
  BeatDetectorState s;
  for (int i = 0; i < 2000; ++i) {
    const double v = bpm(rng);
    history.push_back(v);
    s = accept_bpm(v, std::move(s), config);
    const std::size_t n = std::min<std::size_t>(history.size(), config.avg_window_beats);
    double sum = 0.0;
    for (std::size_t k = history.size() - n; k < history.size(); ++k) sum += history[k];
    CHECK(std::abs(*rolling_average_bpm(s) - sum / n) <= 1e-12);
  }
}

TEST_CASE("compute_ratio") {
  CHECK(compute_ratio({1000, 30'000, 60'000, 100}) == 0.5);
  CHECK(compute_ratio({1000, 42'000, 42'000, 100}) == 1.0);
  CHECK_THROWS_AS(compute_ratio({1000, 30'000, 0, 100}), DivisionGuard);
  CHECK_THROWS_AS(compute_ratio({1000, 0, 0, 0}), EmptyWindow);
}

TEST_CASE("make_ratio_window averages raw values") {
  std::vector<SampleFrame> frames{{0, 10, 20, {}}, {10, 30, 60, {}}};
  const auto w = make_ratio_window(frames, 1000);
  CHECK(w.sample_count == 2);
  CHECK(w.mean_red == 20.0);
  CHECK(w.mean_ir == 40.0);
  CHECK(make_ratio_window({}, 1000).sample_count == 0);
}

TEST_CASE("spo2_estimate and clamp") {
  CHECK(spo2_estimate(0.5, kDefaultCoeffs) == 97.5);
  CHECK(spo2_estimate(0.4, kDefaultCoeffs) == 100.0);
  CHECK(spo2_estimate(5.0, kDefaultCoeffs) == -15.0);
  CHECK(clamp_spo2(105) == 100.0);
  CHECK(clamp_spo2(-15) == 0.0);
  CHECK(clamp_spo2(97.5) == 97.5);
}

TEST_CASE("clamp is idempotent and spo2_estimate decreases in ratio") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-1000.0, 1000.0);
  std::uniform_real_distribution<double> r(0.0, 10.0);
  std::uniform_real_distribution<double> b(0.01, 100.0);
  for (int i = 0; i < 10'000; ++i) {
    const double v = x(rng);
    const double c = clamp_spo2(v);
    CHECK(clamp_spo2(c) == c);
    CHECK(c >= 0.0);
    CHECK(c <= 100.0);
    const CalibrationCoeffs coeffs(x(rng), b(rng));
    const double r1 = r(rng);
    const double r2 = r1 + 1e-3 + r(rng);
    CHECK(spo2_estimate(r1, coeffs) > spo2_estimate(r2, coeffs));
  }
}

TEST_CASE("detect_beats on a noiseless 60 BPM minute") {
  const PipelineConfig config;
  const auto out = synth::generate(synth::SynthProfile::constant(60, 97), 60.0, 100.0);
  const auto smoothed = dsp::smooth(
      dsp::reject_outliers(dsp::remove_dc(out.frames, config.dc_window_s), config.outlier_z), config.smooth_kernel);
  const auto det = detect_beats(smoothed, {}, config);
  CHECK(std::abs(static_cast<double>(det.events.size()) - 60.0) <= 1.0);
  CHECK(det.state.adaptive_threshold > 0.0);
  CHECK_FALSE(det.events.front().delta_t_s.has_value());
  for (std::size_t i = 1; i < det.events.size(); ++i) {
    CHECK(*det.events[i].delta_t_s == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("detect_beats is quiet on zero input") {
  std::vector<dsp::AcSample> zeros;
  for (std::uint32_t i = 0; i < 1000; ++i) zeros.push_back(ac(i * 10, 0.0));
  CHECK(detect_beats(zeros, {}, PipelineConfig{}).events.empty());
}

TEST_CASE("refractory window suppresses a second peak 100 ms later") {
  std::vector<dsp::AcSample> s;
  for (std::uint32_t t = 0; t <= 400; t += 10) {
    double v = 0.0;
    if (t == 100) v = 100.0;
    if (t == 200) v = 100.0;
    s.push_back(ac(t, v));
  }
  const auto det = detect_beats(s, {}, PipelineConfig{});
  REQUIRE(det.events.size() == 1);
  CHECK(det.events[0].beat_time_ms == 100);

  PipelineConfig short_refractory;
  short_refractory.refractory_ms = 50;
  CHECK(detect_beats(s, {}, short_refractory).events.size() == 2);
}

TEST_CASE("outlier-flagged samples never become beats") {
  std::vector<dsp::AcSample> s;
  for (std::uint32_t t = 0; t <= 400; t += 10) s.push_back(ac(t, t == 100 ? 100.0 : 0.0, t == 100));
  const auto det = detect_beats(s, {}, PipelineConfig{});
  CHECK(det.events.empty());
  CHECK(det.state.rolling_peak == 0.0);
}

TEST_CASE("detection split across calls equals one call") {
  const PipelineConfig config;
  auto profile = synth::SynthProfile::constant(110, 97, 5);
  profile.noise_std_counts = 30;
  const auto frames = synth::generate(profile, 20.0, 100.0).frames;
  const auto samples = dsp::smooth(dsp::remove_dc(frames, 3.0), 5);
  const auto whole = detect_beats(samples, {}, config);
  const std::span all(samples);
  auto first = detect_beats(all.first(777), {}, config);
  auto second = detect_beats(all.subspan(777), first.state, config);
  first.events.insert(first.events.end(), second.events.begin(), second.events.end());
  CHECK(first.events == whole.events);
  CHECK(second.state == whole.state);
}

TEST_CASE("loss of contact resets the detector") {
  std::vector<dsp::AcSample> s;
  for (std::uint32_t t = 0; t <= 3000; t += 10) {
    const double phase = std::fmod(t, 500.0);
    s.push_back(ac(t, phase == 100 ? 100.0 : 0.0));
  }
  s.back().dc_ir = 0.0;
  const auto det = detect_beats(s, {}, PipelineConfig{});
  CHECK(det.events.size() == 6);
  CHECK(det.state == BeatDetectorState{});
}

TEST_CASE("process_tick at 90 BPM reports the rate by tick 10") {
  const auto frames = synth::generate(synth::SynthProfile::constant(90, 97), 10.0, 100.0).frames;
  const auto ticks = run_pipeline(frames, PipelineConfig{});
  REQUIRE(ticks.size() == 10);
  CHECK(ticks[9].tick_time_ms() == 10'000);
  REQUIRE(ticks[9].bpm_avg());
  CHECK(std::abs(*ticks[9].bpm_avg() - 90.0) <= 3.0);
  CHECK(ticks[9].contact() == ContactState::Contact);
}

TEST_CASE("low IR baseline gives no contact on every tick") {
  auto profile = synth::SynthProfile::constant(90, 97);
  profile.dc_ir = 30'000;
  const auto frames = synth::generate(profile, 10.0, 100.0).frames;
  for (const auto& v : run_pipeline(frames, PipelineConfig{})) {
    CHECK(v.contact() == ContactState::NoContact);
    CHECK_FALSE(v.bpm_avg());
    CHECK_FALSE(v.bpm_instant());
    CHECK_FALSE(v.spo2_pct());
  }
}

TEST_CASE("run_pipeline is deterministic") {
  auto profile = synth::SynthProfile::constant(130, 93, 99);
  profile.noise_std_counts = 50;
  const auto frames = synth::generate(profile, 15.0, 100.0).frames;
  CHECK(run_pipeline(frames, PipelineConfig{}) == run_pipeline(frames, PipelineConfig{}));
}

TEST_CASE("noiseless accuracy at tick 10") {
  for (double bpm : {60.0, 90.0, 120.0, 160.0}) {
    for (double spo2 : {88.0, 95.0, 98.0}) {
      CAPTURE(bpm);
      CAPTURE(spo2);
      const auto frames = synth::generate(synth::SynthProfile::constant(bpm, spo2), 10.0, 100.0).frames;
      const auto ticks = run_pipeline(frames, PipelineConfig{});
      REQUIRE(ticks.size() >= 10);
      REQUIRE(ticks[9].bpm_avg());
      CHECK(std::abs(*ticks[9].bpm_avg() - bpm) <= 3.0);
      REQUIRE(ticks[9].spo2_pct());
      CHECK(std::abs(*ticks[9].spo2_pct() - spo2) <= 1.0);
    }
  }
}

TEST_CASE("run_pipeline rejects unordered or out-of-range frames") {
  std::vector<SampleFrame> frames{{0, 1, 1, {}}, {0, 1, 1, {}}};
  CHECK_THROWS_AS(run_pipeline(frames, PipelineConfig{}), OrderError);
  frames[1] = {10, kAdcMax + 1, 1, {}};
  CHECK_THROWS_AS(run_pipeline(frames, PipelineConfig{}), RangeError);
}

TEST_CASE("temperature is averaged over the ratio window") {
  auto profile = synth::SynthProfile::constant(80, 97);
  profile.temperature_c = 38.7;
  const auto ticks = run_pipeline(synth::generate(profile, 3.0, 100.0).frames, PipelineConfig{});
  REQUIRE(ticks.back().temperature_c());
  CHECK(*ticks.back().temperature_c() == doctest::Approx(38.7));
}

TEST_CASE("TickScheduler groups frames by signal time") {
  TickScheduler ticks(1000);
  std::vector<Tick> done;
  for (std::uint32_t t : {0u, 500u, 999u, 1000u, 3500u}) {
    for (auto& tick : ticks.push({t, 1, 1, {}})) done.push_back(std::move(tick));
  }
  REQUIRE(done.size() == 3);
  CHECK(done[0].tick_time_ms == 1000);
  CHECK(done[0].frames.size() == 3);
  CHECK(done[1].tick_time_ms == 2000);
  CHECK(done[1].frames.size() == 1);
  CHECK(done[2].tick_time_ms == 3000);
  CHECK(done[2].frames.empty());
  const auto last = ticks.finish();
  REQUIRE(last);
  CHECK(last->tick_time_ms == 4000);
  CHECK(last->frames.size() == 1);
  CHECK_FALSE(ticks.finish());
  CHECK_THROWS_AS(TickScheduler(0), ConfigError);
}

TEST_CASE("gaps in the stream produce no-contact ticks") {
  auto frames = synth::generate(synth::SynthProfile::constant(80, 97), 10.0, 100.0).frames;
  std::erase_if(frames, [](const SampleFrame& f) { return f.timestamp_ms >= 4000 && f.timestamp_ms < 6000; });
  const auto ticks = run_pipeline(frames, PipelineConfig{});
  REQUIRE(ticks.size() == 10);
  CHECK(ticks[4].contact() == ContactState::NoContact);
  CHECK(ticks[5].contact() == ContactState::NoContact);
  CHECK(ticks[6].contact() == ContactState::Contact);
}
