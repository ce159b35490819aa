#include "pawpulse/emotion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "pawpulse/errors.hpp"

namespace pawpulse::emotion {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::string_view kDefaultRules = R"(# Default emotion rules: <bpm>,<spo2>,<temp> => <State>
# BPM bands: low normal elevated high. SpO2 bands: low reduced normal.
# Temperature bands: low normal fever; * also matches a missing reading.
normal,normal,* => Calm
low,normal,* => Calm
elevated,normal,* => Excited
high,normal,* => Excited
high,normal,fever => Stressed
elevated,reduced,* => Stressed
high,reduced,* => Stressed
*,*,fever => Stressed
*,low,* => Alert
*,*,low => Alert
)";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

void validate_band_list(const std::vector<Band>& bands, std::string_view name, bool required) {
  if (bands.empty()) {
    if (required) throw ConfigError(std::string(name) + " bands must not be empty");
    return;
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const Band& b = bands[i];
    if (b.label.empty() || b.label == kWildcard || b.label.find_first_of(",= \t#") != std::string::npos) {
      throw ConfigError(std::string(name) + " band label '" + b.label + "' is not a plain word");
    }
    if (!labels.insert(b.label).second) {
      throw ConfigError(std::string(name) + " band label '" + b.label + "' repeats");
    }
    if (!(b.lower < b.upper)) throw ConfigError(std::string(name) + " band '" + b.label + "' is empty");
    if (i + 1 < bands.size()) {
      if (b.upper_inclusive) {
        throw ConfigError(std::string(name) + " band '" + b.label + "' overlaps the next band");
      }
      if (b.upper != bands[i + 1].lower) {
        throw ConfigError(std::string(name) + " bands are not contiguous at '" + b.label + "'");
      }
    }
  }
}

std::string band_label(const std::vector<Band>& bands, double value, std::string_view name) {
  for (const auto& b : bands) {
    if (b.contains(value)) return b.label;
  }
  throw DomainError(std::string(name) + " value " + std::to_string(value) + " lies outside every band");
}

bool field_matches(const std::string& pattern, const std::optional<std::string>& value) {
  return pattern == kWildcard || (value && *value == pattern);
}

}  // namespace

std::string_view to_string(EmotionState s) {
  switch (s) {
    case EmotionState::Calm: return "Calm";
    case EmotionState::Excited: return "Excited";
    case EmotionState::Stressed: return "Stressed";
    case EmotionState::Alert: return "Alert";
  }
  return "Alert";
}

std::string_view to_string(Certainty c) { return c == Certainty::Decided ? "Decided" : "Boundary"; }

EmotionState parse_state(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "calm") return EmotionState::Calm;
  if (lower == "excited") return EmotionState::Excited;
  if (lower == "stressed") return EmotionState::Stressed;
  if (lower == "alert") return EmotionState::Alert;
  throw ConfigError("unknown emotion state '" + std::string(name) + "'");
}

Certainty parse_certainty(std::string_view name) {
  if (name == "Decided") return Certainty::Decided;
  if (name == "Boundary") return Certainty::Boundary;
  throw ConfigError("unknown certainty '" + std::string(name) + "'");
}

void VitalsBands::validate() const {
  validate_band_list(bpm, "BPM", true);
  validate_band_list(spo2, "SpO2", true);
  validate_band_list(temp, "temperature", false);
}

VitalsBands default_bands() {
  VitalsBands b;
  b.bpm = {{"low", 30, 60}, {"normal", 60, 100}, {"elevated", 100, 140}, {"high", 140, 220, true}};
  b.spo2 = {{"low", 0, 90}, {"reduced", 90, 95}, {"normal", 95, 100, true}};
  b.temp = {{"low", -kInf, 37.5}, {"normal", 37.5, 39.2}, {"fever", 39.2, kInf, true}};
  return b;
}

DiscreteVitals discretize(const VitalsEstimate& vitals, const VitalsBands& bands) {
  if (vitals.contact() == ContactState::NoContact) {
    throw MissingVitals("no sensor contact at t=" + std::to_string(vitals.tick_time_ms()) + " ms");
  }
  if (!vitals.bpm_avg()) {
    throw MissingVitals("no average BPM at t=" + std::to_string(vitals.tick_time_ms()) + " ms");
  }
  DiscreteVitals d;
  d.bpm = band_label(bands.bpm, *vitals.bpm_avg(), "BPM");
  if (auto spo2 = vitals.spo2_pct()) d.spo2 = band_label(bands.spo2, *spo2, "SpO2");
  if (auto temp = vitals.temperature_c(); temp && !bands.temp.empty()) {
    d.temp = band_label(bands.temp, *temp, "temperature");
  }
  return d;
}

bool Rule::matches(const DiscreteVitals& v) const {
  return field_matches(bpm, v.bpm) && field_matches(spo2, v.spo2) && field_matches(temp, v.temp);
}

RuleTable parse_rules(std::istream& in) {
  RuleTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto arrow = view.find("=>");
    if (arrow == std::string_view::npos) throw ParseError(line_no, "expected '<bpm>,<spo2>,<temp> => <State>'");
    const auto pattern = trim(view.substr(0, arrow));
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = pattern.find(',', start);
      fields.emplace_back(trim(pattern.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3 || std::any_of(fields.begin(), fields.end(), [](const auto& f) { return f.empty(); })) {
      throw ParseError(line_no, "a rule needs exactly three band labels");
    }
    Rule rule;
    rule.id = line_no;
    rule.bpm = fields[0];
    rule.spo2 = fields[1];
    rule.temp = fields[2];
    try {
      rule.state = parse_state(trim(view.substr(arrow + 2)));
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    table.push_back(std::move(rule));
  }
  return table;
}

RuleTable load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rule file '" + path + "'");
  return parse_rules(in);
}

void validate_rules(const RuleTable& table, const VitalsBands& bands) {
  auto known = [](const std::vector<Band>& list, const std::string& label) {
    return label == kWildcard ||
           std::any_of(list.begin(), list.end(), [&](const Band& b) { return b.label == label; });
  };
  for (const auto& r : table) {
    if (!known(bands.bpm, r.bpm) || !known(bands.spo2, r.spo2) || !known(bands.temp, r.temp)) {
      throw ConfigError("rule on line " + std::to_string(r.id) + " names an unknown band label");
    }
  }
}

std::string_view default_rules_text() { return kDefaultRules; }

RuleTable default_rules() {
  std::istringstream in{std::string(kDefaultRules)};
  return parse_rules(in);
}

EmotionAssessment classify(const DiscreteVitals& vitals, const RuleTable& table) {
  if (table.empty()) throw ConfigError("emotion rule table is empty");
  EmotionAssessment out;
  std::set<EmotionState> states;
  for (const auto& rule : table) {
    if (!rule.matches(vitals)) continue;
    out.fired_rules.push_back(rule.id);
    states.insert(rule.state);
  }
  if (states.size() == 1) {
    out.state = *states.begin();
    out.certainty = Certainty::Decided;
  } else {
    out.state = states.empty() ? EmotionState::Alert : *states.rbegin();
    out.certainty = Certainty::Boundary;
  }
  return out;
}

CoverageReport audit_coverage(const VitalsBands& bands, const RuleTable& table) {
  CoverageReport report;
  std::vector<std::optional<std::string>> temps;
  for (const auto& t : bands.temp) temps.emplace_back(t.label);
  temps.emplace_back(std::nullopt);
  for (const auto& b : bands.bpm) {
    for (const auto& s : bands.spo2) {
      for (const auto& t : temps) {
        DiscreteVitals d{b.label, s.label, t};
        auto a = classify(d, table);
        if (a.certainty == Certainty::Boundary) ++report.boundary_count;
        report.outcomes.emplace_back(std::move(d), std::move(a));
      }
    }
  }
  return report;
}

}  // namespace pawpulse::emotion
