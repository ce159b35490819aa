#include "pawpulse/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>

#include "pawpulse/errors.hpp"

namespace pawpulse::calibration {

CalibrationFit fit_calibration(std::span<const CalibrationPair> pairs) {
  if (pairs.size() < 2) {
    throw InsufficientData("calibration needs at least 2 pairs, got " + std::to_string(pairs.size()));
  }
  const auto n = static_cast<double>(pairs.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.ratio) || !std::isfinite(p.reference_spo2)) {
      throw DomainError("calibration pairs must be finite");
    }
    mean_x += p.ratio;
    mean_y += p.reference_spo2;
  }
  mean_x /= n;
  mean_y /= n;

  // Centered sums keep the normal equations well conditioned.
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : pairs) {
    const double dx = p.ratio - mean_x;
    sxx += dx * dx;
    sxy += dx * (p.reference_spo2 - mean_y);
  }
  const bool all_equal = std::all_of(pairs.begin(), pairs.end(),
                                     [&](const CalibrationPair& p) { return p.ratio == pairs[0].ratio; });
  if (all_equal || sxx == 0.0) throw DegenerateFit("all calibration ratios are equal");

  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  if (!(slope < 0.0)) {
    throw DegenerateFit("fitted SpO2 does not decrease with ratio (slope " + std::to_string(slope) + ")");
  }

  CalibrationFit fit{CalibrationCoeffs(intercept, -slope), 0.0, pairs.size()};
  double ss = 0.0;
  for (const auto& p : pairs) {
    const double r = p.reference_spo2 - (intercept + slope * p.ratio);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

std::vector<CalibrationPair> parse_pairs(std::istream& in) {
  auto trim = [](std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return std::string_view{};
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
  };
  auto number = [](std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw ParseError(line_no, "not a number: '" + std::string(s) + "'");
    }
    return v;
  };

  std::vector<CalibrationPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected two comma-separated columns");
    }
    pairs.push_back({number(trim(view.substr(0, comma)), line_no),
                     number(trim(view.substr(comma + 1)), line_no)});
  }
  return pairs;
}

}  // namespace pawpulse::calibration
