#pragma once

// Newline-delimited JSON session files: one header line, then one record per
// line. See docs/session-format.md for the exact layout.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pawpulse/emotion.hpp"
#include "pawpulse/signal_core.hpp"

namespace pawpulse::session {

inline constexpr std::string_view kFormatName = "pawpulse-session";
inline constexpr int kFormatVersion = 1;

struct SessionHeader {
  /// Wall-clock start as given by the operator (ISO-8601); absent when the
  /// session was produced without one. All record timestamps are relative.
  std::optional<std::string> start_wall_clock;
  PipelineConfig config;

  bool operator==(const SessionHeader&) const = default;
};

struct EmotionRecord {
  std::uint32_t tick_time_ms = 0;
  emotion::EmotionAssessment assessment;

  bool operator==(const EmotionRecord&) const = default;
};

enum class RecordKind { Raw, Vitals, Emotion };

struct SessionRecord {
  std::uint64_t seq = 0;
  std::variant<SampleFrame, VitalsEstimate, EmotionRecord> payload;

  RecordKind kind() const { return static_cast<RecordKind>(payload.index()); }
  bool operator==(const SessionRecord&) const = default;
};

/// Canonical single-line JSON for a header or record (no trailing newline).
std::string format_header(const SessionHeader& header);
std::string format_record(const SessionRecord& record);
/// The record's payload without its sequence number; used to compare
/// recomputed records against stored ones.
std::string format_payload(const SessionRecord& record);

SessionHeader parse_header(const std::string& line, std::size_t line_no = 1);
SessionRecord parse_record(const std::string& line, std::size_t line_no);

/// Appends records to a session stream, one flushed line per record.
class SessionWriter {
 public:
  /// Writes the header immediately.
  SessionWriter(std::ostream& out, const SessionHeader& header);
  /// Creates (truncates) the file at `path`. Throws IoError.
  static SessionWriter open(const std::string& path, const SessionHeader& header);

  /// SeqError unless `record.seq` exceeds the last written seq; OrderError if a
  /// raw frame does not follow the previous raw frame in time.
  void append(const SessionRecord& record);
  /// Appends with the next free sequence number and returns it.
  std::uint64_t append_next(decltype(SessionRecord::payload) payload);

  std::uint64_t records_written() const { return written_; }

 private:
  SessionWriter(std::unique_ptr<std::ostream> owned, const SessionHeader& header);

  std::unique_ptr<std::ostream> owned_;
  std::ostream* out_;
  std::optional<std::uint64_t> last_seq_;
  std::optional<std::uint32_t> last_raw_ms_;
  std::uint64_t written_ = 0;
};

/// Reads a session stream record by record.
class SessionReader {
 public:
  /// Reads and parses the header line. Throws ParseError.
  explicit SessionReader(std::istream& in);

  const SessionHeader& header() const { return header_; }
  /// Next record in stored order, or nullopt at end of stream. Throws
  /// ParseError naming the line; records already returned stay valid.
  std::optional<SessionRecord> next();

 private:
  std::istream& in_;
  SessionHeader header_;
  std::size_t line_no_ = 1;
  std::optional<std::uint64_t> last_seq_;
};

struct Session {
  SessionHeader header;
  std::vector<SessionRecord> records;
};

Session read_session(std::istream& in);
Session load_session(const std::string& path);

struct Stats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  bool operator==(const Stats&) const = default;
};

struct SessionSummary {
  double duration_s = 0.0;
  std::size_t vitals_ticks = 0;
  std::size_t contact_ticks = 0;
  std::optional<Stats> bpm;
  std::optional<Stats> spo2;
  double contact_uptime = 0.0;
  /// State name to tick count. "none" counts vitals ticks without an
  /// assessment, so the counts sum to `vitals_ticks`.
  std::map<std::string, std::size_t> emotion_histogram;

  bool operator==(const SessionSummary&) const = default;
};

/// Statistics over Contact ticks only. EmptySession when there are no vitals
/// records or no Contact ticks.
SessionSummary summarize(const std::vector<SessionRecord>& records);

std::string render_text_report(const SessionSummary& summary);
std::string render_svg_report(const std::vector<SessionRecord>& records, const SessionSummary& summary);

struct ReplayCheck {
  std::size_t stored_vitals = 0;
  std::size_t recomputed_vitals = 0;
  /// Index of the first differing vitals record, if any.
  std::optional<std::size_t> first_mismatch;

  bool identical() const { return !first_mismatch && stored_vitals == recomputed_vitals; }
};

/// Reruns the raw records through a fresh pipeline built from the header's
/// configuration and compares the recomputed vitals with the stored ones.
ReplayCheck verify_replay(const Session& session);

}  // namespace pawpulse::session
