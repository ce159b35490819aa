#pragma once

// Frame-at-a-time driver: validation, tick scheduling, vitals and emotion.

#include <optional>
#include <vector>

#include "pawpulse/emotion.hpp"
#include "pawpulse/vitals.hpp"

namespace pawpulse {

struct TickReport {
  vitals::Tick tick;
  VitalsEstimate vitals;
  /// Present when the tick has contact and an average BPM.
  std::optional<emotion::EmotionAssessment> emotion;
};

class Monitor {
 public:
  Monitor(PipelineConfig config, emotion::RuleTable rules, emotion::VitalsBands bands);

  /// Validates `frame` against the previous accepted frame (RangeError,
  /// OrderError) and returns the ticks it completed. A rejected frame leaves
  /// the monitor unchanged.
  std::vector<TickReport> push(const SampleFrame& frame);
  std::vector<TickReport> finish();

  const vitals::VitalsPipeline& pipeline() const { return pipeline_; }

 private:
  TickReport run(vitals::Tick tick);

  vitals::VitalsPipeline pipeline_;
  vitals::TickScheduler scheduler_;
  emotion::RuleTable rules_;
  emotion::VitalsBands bands_;
  std::optional<SampleFrame> previous_;
};

}  // namespace pawpulse
