#include <doctest.h>

#include <sstream>

#include "pawpulse/config.hpp"
#include "pawpulse/errors.hpp"
#include "pawpulse/signal_core.hpp"

using namespace pawpulse;

TEST_CASE("validate_frame accepts in-range frames unchanged") {
  const SampleFrame f{0, 1000, 2000, std::nullopt};
  CHECK(validate_frame(f) == f);
  const SampleFrame edge{7, kAdcMax, kAdcMax, std::int16_t{385}};
  CHECK(validate_frame(edge) == edge);
}

TEST_CASE("validate_frame rejects values one past the ADC maximum") {
  CHECK_THROWS_AS(validate_frame({0, 1u << 18, 0, std::nullopt}), RangeError);
  CHECK_THROWS_AS(validate_frame({0, 0, 1u << 18, std::nullopt}), RangeError);
}

TEST_CASE("validate_frame requires strictly increasing timestamps") {
  const SampleFrame a{5, 1, 1, std::nullopt};
  const SampleFrame b{5, 2, 2, std::nullopt};
  CHECK_THROWS_AS(validate_frame(b, a), OrderError);
  CHECK_THROWS_AS(validate_frame(SampleFrame{4, 2, 2, std::nullopt}, a), OrderError);
  CHECK_NOTHROW(validate_frame(SampleFrame{6, 2, 2, std::nullopt}, a));
}

TEST_CASE("temperature is fixed point tenths of a degree") {
  SampleFrame f;
  CHECK_FALSE(f.temperature_c());
  f.temperature_dc = 385;
  CHECK(*f.temperature_c() == doctest::Approx(38.5));
}

TEST_CASE("VitalsEstimate enforces the SpO2 range and the no-contact rule") {
  CHECK_NOTHROW(VitalsEstimate::with_contact(1000, 80.0, 80.0, 0.0));
  CHECK_NOTHROW(VitalsEstimate::with_contact(1000, 80.0, 80.0, 100.0));
  CHECK_THROWS_AS(VitalsEstimate::with_contact(1000, 80.0, 80.0, 100.5), RangeError);
  CHECK_THROWS_AS(VitalsEstimate::with_contact(1000, 80.0, 80.0, -0.1), RangeError);
  CHECK_THROWS_AS(VitalsEstimate::with_contact(1000, -5.0, std::nullopt, std::nullopt), RangeError);

  const auto none = VitalsEstimate::no_contact(2000);
  CHECK(none.contact() == ContactState::NoContact);
  CHECK_FALSE(none.bpm_instant());
  CHECK_FALSE(none.bpm_avg());
  CHECK_FALSE(none.spo2_pct());
  CHECK_FALSE(none.temperature_c());
}

TEST_CASE("CalibrationCoeffs requires a positive slope") {
  CHECK_NOTHROW(CalibrationCoeffs(110, 25));
  CHECK_THROWS_AS(CalibrationCoeffs(110, 0), ConfigError);
  CHECK_THROWS_AS(CalibrationCoeffs(110, -1), ConfigError);
  CHECK(kDefaultCoeffs.a() == 110.0);
  CHECK(kDefaultCoeffs.b() == 25.0);
}

TEST_CASE("default pipeline config") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.sample_rate_hz == 100.0);
  CHECK(c.bpm_valid_min == 30.0);
  CHECK(c.bpm_valid_max == 220.0);
  CHECK(c.avg_window_beats == 4);
  CHECK(c.contact_ir_threshold == 50'000);
  CHECK(c.tick_interval_ms == 1000);
}

TEST_CASE("pipeline config invariants") {
  auto invalid = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.bpm_valid_min = 220; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.avg_window_beats = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.tick_interval_ms = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.smooth_kernel = 4; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.sample_rate_hz = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](PipelineConfig& c) { c.threshold_fraction = 1.0; }).validate(), ConfigError);
}

TEST_CASE("config file parsing") {
  std::istringstream in(
      "# canine defaults, tuned\n"
      "bpm_valid_max = 200\n"
      "avg_window_beats=6   # longer average\n"
      "\n"
      "coeff_a = 104.5\n");
  const auto c = parse_config(in);
  CHECK(c.bpm_valid_max == 200.0);
  CHECK(c.avg_window_beats == 6);
  CHECK(c.coeffs.a() == 104.5);
  CHECK(c.coeffs.b() == 25.0);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  std::istringstream unknown("bpm_valid_max = 200\nheart_rate = 3\n");
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);
  std::istringstream bad_int("avg_window_beats = 2.5\n");
  CHECK_THROWS_AS(parse_config(bad_int), ConfigError);
  std::istringstream negative("contact_ir_threshold = -1\n");
  CHECK_THROWS_AS(parse_config(negative), ConfigError);
  std::istringstream no_eq("bpm_valid_max 200\n");
  CHECK_THROWS_AS(parse_config(no_eq), ParseError);
  std::istringstream invalid("bpm_valid_min = 250\n");
  CHECK_THROWS_AS(parse_config(invalid), ConfigError);
}

TEST_CASE("written config parses back to the same config") {
  PipelineConfig c;
  c.bpm_valid_min = 35.25;
  c.coeffs = CalibrationCoeffs(104.123456789, 19.75);
  c.outlier_z = 5.5;
  std::stringstream ss;
  write_config(ss, c);
  CHECK(parse_config(ss) == c);
}
