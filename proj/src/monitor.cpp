#include "pawpulse/monitor.hpp"

#include "pawpulse/errors.hpp"

namespace pawpulse {

Monitor::Monitor(PipelineConfig config, emotion::RuleTable rules, emotion::VitalsBands bands)
    : pipeline_(config),
      scheduler_(config.tick_interval_ms),
      rules_(std::move(rules)),
      bands_(std::move(bands)) {
  bands_.validate();
  if (rules_.empty()) throw ConfigError("emotion rule table is empty");
  emotion::validate_rules(rules_, bands_);
}

std::vector<TickReport> Monitor::push(const SampleFrame& frame) {
  validate_frame(frame, previous_);
  previous_ = frame;
  std::vector<TickReport> out;
  for (auto& tick : scheduler_.push(frame)) out.push_back(run(std::move(tick)));
  return out;
}

std::vector<TickReport> Monitor::finish() {
  std::vector<TickReport> out;
  if (auto tick = scheduler_.finish()) out.push_back(run(std::move(*tick)));
  return out;
}

TickReport Monitor::run(vitals::Tick tick) {
  VitalsEstimate v = pipeline_.process_tick(tick.frames, tick.tick_time_ms);
  std::optional<emotion::EmotionAssessment> assessment;
  if (v.contact() == ContactState::Contact && v.bpm_avg()) {
    assessment = emotion::classify(emotion::discretize(v, bands_), rules_);
  }
  return TickReport{std::move(tick), std::move(v), std::move(assessment)};
}

}  // namespace pawpulse
