#pragma once

// Emotion assessment as a decision table over discretized vitals.
//
// Vitals are first mapped to band labels; rules then match on labels only.
// When no rule or rules naming different states match, the assessment is
// reported as Boundary and resolved to the most severe candidate (Alert when
// nothing matched).

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse::emotion {

/// Ordered by severity, least severe first.
enum class EmotionState { Calm, Excited, Stressed, Alert };
enum class Certainty { Decided, Boundary };

std::string_view to_string(EmotionState s);
std::string_view to_string(Certainty c);
/// Accepts the state name in any letter case. Throws ConfigError otherwise.
EmotionState parse_state(std::string_view name);
Certainty parse_certainty(std::string_view name);

/// [lower, upper), or [lower, upper] when `upper_inclusive`.
struct Band {
  std::string label;
  double lower = 0.0;
  double upper = 0.0;
  bool upper_inclusive = false;

  bool contains(double v) const {
    return v >= lower && (upper_inclusive ? v <= upper : v < upper);
  }
};

struct VitalsBands {
  std::vector<Band> bpm;
  std::vector<Band> spo2;
  /// Empty disables temperature discretization.
  std::vector<Band> temp;

  /// Throws ConfigError unless each list is contiguous, non-overlapping and
  /// uniquely labelled.
  void validate() const;
};

/// BPM low/normal/elevated/high, SpO2 low/reduced/normal, temperature
/// low/normal/fever.
VitalsBands default_bands();

struct DiscreteVitals {
  std::string bpm;
  std::optional<std::string> spo2;
  std::optional<std::string> temp;

  bool operator==(const DiscreteVitals&) const = default;
};

/// MissingVitals unless the estimate has contact and an average BPM.
/// DomainError when a present value falls outside every band.
DiscreteVitals discretize(const VitalsEstimate& vitals, const VitalsBands& bands);

inline constexpr std::string_view kWildcard = "*";

struct Rule {
  /// Line number in the rule file; unique within a table.
  std::size_t id = 0;
  std::string bpm;
  std::string spo2;
  std::string temp;
  EmotionState state = EmotionState::Calm;

  bool matches(const DiscreteVitals& v) const;
};

using RuleTable = std::vector<Rule>;

/// Parses `<bpm>,<spo2>,<temp|*> => <State>` lines; `#` begins a comment.
RuleTable parse_rules(std::istream& in);
RuleTable load_rules(const std::string& path);
/// Throws ConfigError when a rule names a label absent from `bands`.
void validate_rules(const RuleTable& table, const VitalsBands& bands);

/// Text of the shipped rule table.
std::string_view default_rules_text();
RuleTable default_rules();

struct EmotionAssessment {
  EmotionState state = EmotionState::Alert;
  Certainty certainty = Certainty::Boundary;
  std::vector<std::size_t> fired_rules;

  bool operator==(const EmotionAssessment&) const = default;
};

/// Looks only at band labels. ConfigError on an empty table.
EmotionAssessment classify(const DiscreteVitals& vitals, const RuleTable& table);

struct CoverageReport {
  std::vector<std::pair<DiscreteVitals, EmotionAssessment>> outcomes;
  std::size_t boundary_count = 0;
  double boundary_fraction() const {
    return outcomes.empty() ? 0.0 : static_cast<double>(boundary_count) / outcomes.size();
  }
};

/// Classifies every label tuple the bands can produce: each BPM band, each
/// SpO2 band, and each temperature band plus "no temperature".
CoverageReport audit_coverage(const VitalsBands& bands, const RuleTable& table);

}  // namespace pawpulse::emotion
