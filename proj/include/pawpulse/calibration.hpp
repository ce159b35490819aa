#pragma once

// Least-squares fit of the SpO2 calibration line against reference readings.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse::calibration {

struct CalibrationPair {
  double ratio = 0.0;
  double reference_spo2 = 0.0;
};

struct CalibrationFit {
  CalibrationCoeffs coeffs;
  /// Root-mean-square residual of the fitted line, in percent SpO2.
  double rms = 0.0;
  std::size_t count = 0;
};

/// Ordinary least squares of SpO2 = a - b * ratio.
///
/// Throws InsufficientData with fewer than two pairs and DegenerateFit when
/// every ratio is equal or the fitted slope does not decrease (b <= 0).
CalibrationFit fit_calibration(std::span<const CalibrationPair> pairs);

/// Reads `ratio,reference_spo2` lines. Blank lines and `#` comments are
/// skipped; anything else malformed throws ParseError.
std::vector<CalibrationPair> parse_pairs(std::istream& in);

}  // namespace pawpulse::calibration
