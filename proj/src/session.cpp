#include "pawpulse/session.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "pawpulse/config.hpp"
#include "pawpulse/errors.hpp"
#include "pawpulse/vitals.hpp"

namespace pawpulse::session {
namespace {

using Json = nlohmann::ordered_json;

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json config_to_json(const PipelineConfig& config) {
  Json j = Json::object();
  for (auto key : config_keys()) {
    const std::string value = get_config_value(config, key);
    if (config_key_is_integral(key)) {
      j[std::string(key)] = std::stoull(value);
    } else {
      j[std::string(key)] = std::stod(value);
    }
  }
  return j;
}

PipelineConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config snapshot must be an object");
  PipelineConfig config;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("config value for '" + key + "' must be a number");
    if (config_key_is_integral(key)) {
      if (!value.is_number_unsigned()) throw ConfigError("config value for '" + key + "' must be an integer");
      set_config_value(config, key, std::to_string(value.get<std::uint64_t>()));
    } else {
      set_config_value(config, key, fmt::format("{}", value.get<double>()));
    }
  }
  config.validate();
  return config;
}

Json payload_json(const SessionRecord& record, bool with_seq) {
  Json j = Json::object();
  if (with_seq) j["seq"] = record.seq;
  std::visit(Overloaded{
                 [&](const SampleFrame& f) {
                   j["kind"] = "raw";
                   j["t"] = f.timestamp_ms;
                   j["red"] = f.red;
                   j["ir"] = f.ir;
                   j["temp_dc"] = f.temperature_dc ? Json(*f.temperature_dc) : Json(nullptr);
                 },
                 [&](const VitalsEstimate& v) {
                   j["kind"] = "vitals";
                   j["t"] = v.tick_time_ms();
                   j["contact"] = std::string(to_string(v.contact()));
                   j["bpm"] = optional_number(v.bpm_instant());
                   j["bpm_avg"] = optional_number(v.bpm_avg());
                   j["spo2"] = optional_number(v.spo2_pct());
                   j["temp_c"] = optional_number(v.temperature_c());
                 },
                 [&](const EmotionRecord& e) {
                   j["kind"] = "emotion";
                   j["t"] = e.tick_time_ms;
                   j["state"] = std::string(emotion::to_string(e.assessment.state));
                   j["certainty"] = std::string(emotion::to_string(e.assessment.certainty));
                   j["rules"] = e.assessment.fired_rules;
                 },
             },
             record.payload);
  return j;
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T unsigned_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<T>::max()) {
    throw ConfigError(std::string("field '") + key + "' must be an unsigned integer");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

std::optional<double> optional_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number or null");
  return v.get<double>();
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    Json j = Json::parse(line);
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string format_header(const SessionHeader& header) {
  Json j = Json::object();
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["start_wall_clock"] = header.start_wall_clock ? Json(*header.start_wall_clock) : Json(nullptr);
  j["config"] = config_to_json(header.config);
  return j.dump();
}

std::string format_record(const SessionRecord& record) { return payload_json(record, true).dump(); }

std::string format_payload(const SessionRecord& record) { return payload_json(record, false).dump(); }

SessionHeader parse_header(const std::string& line, std::size_t line_no) {
  const Json j = parse_json_line(line, line_no);
  try {
    if (string_field(j, "format") != kFormatName) throw ConfigError("not a session file");
    if (field(j, "version") != kFormatVersion) throw ConfigError("unsupported session format version");
    SessionHeader h;
    const Json& start = field(j, "start_wall_clock");
    if (!start.is_null()) h.start_wall_clock = string_field(j, "start_wall_clock");
    h.config = config_from_json(field(j, "config"));
    return h;
  } catch (const ConfigError& e) {
    throw ParseError(line_no, e.what());
  }
}

SessionRecord parse_record(const std::string& line, std::size_t line_no) {
  const Json j = parse_json_line(line, line_no);
  try {
    SessionRecord r;
    r.seq = unsigned_field<std::uint64_t>(j, "seq");
    const std::string kind = string_field(j, "kind");
    if (kind == "raw") {
      SampleFrame f;
      f.timestamp_ms = unsigned_field<std::uint32_t>(j, "t");
      f.red = unsigned_field<std::uint32_t>(j, "red");
      f.ir = unsigned_field<std::uint32_t>(j, "ir");
      const Json& temp = field(j, "temp_dc");
      if (!temp.is_null()) {
        if (!temp.is_number_integer()) throw ConfigError("field 'temp_dc' must be an integer");
        const auto v = temp.get<std::int64_t>();
        if (v < std::numeric_limits<std::int16_t>::min() || v > std::numeric_limits<std::int16_t>::max()) {
          throw ConfigError("field 'temp_dc' out of range");
        }
        f.temperature_dc = static_cast<std::int16_t>(v);
      }
      r.payload = validate_frame(f);
    } else if (kind == "vitals") {
      const auto t = unsigned_field<std::uint32_t>(j, "t");
      const std::string contact = string_field(j, "contact");
      const auto bpm = optional_field(j, "bpm");
      const auto avg = optional_field(j, "bpm_avg");
      const auto spo2 = optional_field(j, "spo2");
      const auto temp = optional_field(j, "temp_c");
      if (contact == to_string(ContactState::NoContact)) {
        if (bpm || avg || spo2 || temp) throw ConfigError("no-contact record carries vitals");
        r.payload = VitalsEstimate::no_contact(t);
      } else if (contact == to_string(ContactState::Contact)) {
        r.payload = VitalsEstimate::with_contact(t, bpm, avg, spo2, temp);
      } else {
        throw ConfigError("unknown contact state '" + contact + "'");
      }
    } else if (kind == "emotion") {
      EmotionRecord e;
      e.tick_time_ms = unsigned_field<std::uint32_t>(j, "t");
      e.assessment.state = emotion::parse_state(string_field(j, "state"));
      e.assessment.certainty = emotion::parse_certainty(string_field(j, "certainty"));
      const Json& rules = field(j, "rules");
      if (!rules.is_array()) throw ConfigError("field 'rules' must be an array");
      for (const auto& id : rules) {
        if (!id.is_number_unsigned()) throw ConfigError("rule ids must be unsigned integers");
        e.assessment.fired_rules.push_back(id.get<std::size_t>());
      }
      r.payload = e;
    } else {
      throw ConfigError("unknown record kind '" + kind + "'");
    }
    return r;
  } catch (const Error& e) {
    if (dynamic_cast<const ParseError*>(&e)) throw;
    throw ParseError(line_no, e.what());
  }
}

SessionWriter::SessionWriter(std::ostream& out, const SessionHeader& header) : out_(&out) {
  *out_ << format_header(header) << '\n';
  out_->flush();
  if (!*out_) throw IoError("failed to write session header");
}

SessionWriter::SessionWriter(std::unique_ptr<std::ostream> owned, const SessionHeader& header)
    : SessionWriter(*owned, header) {
  owned_ = std::move(owned);
}

SessionWriter SessionWriter::open(const std::string& path, const SessionHeader& header) {
  auto file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*file) throw IoError("cannot create session file '" + path + "'");
  return SessionWriter(std::move(file), header);
}

void SessionWriter::append(const SessionRecord& record) {
  if (last_seq_ && record.seq <= *last_seq_) {
    throw SeqError("sequence number " + std::to_string(record.seq) + " does not exceed " +
                   std::to_string(*last_seq_));
  }
  if (const auto* frame = std::get_if<SampleFrame>(&record.payload)) {
    if (last_raw_ms_ && frame->timestamp_ms <= *last_raw_ms_) {
      throw OrderError("raw record at " + std::to_string(frame->timestamp_ms) + " ms is out of order");
    }
    last_raw_ms_ = frame->timestamp_ms;
  }
  *out_ << format_record(record) << '\n';
  out_->flush();
  if (!*out_) throw IoError("failed to append session record");
  last_seq_ = record.seq;
  ++written_;
}

std::uint64_t SessionWriter::append_next(decltype(SessionRecord::payload) payload) {
  const std::uint64_t seq = last_seq_ ? *last_seq_ + 1 : 0;
  append(SessionRecord{seq, std::move(payload)});
  return seq;
}

SessionReader::SessionReader(std::istream& in) : in_(in) {
  std::string line;
  if (!std::getline(in_, line)) throw ParseError(1, "missing session header");
  header_ = parse_header(line, 1);
}

std::optional<SessionRecord> SessionReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty()) continue;
    SessionRecord r = parse_record(line, line_no_);
    if (last_seq_ && r.seq <= *last_seq_) throw ParseError(line_no_, "sequence number does not increase");
    last_seq_ = r.seq;
    return r;
  }
  return std::nullopt;
}

Session read_session(std::istream& in) {
  SessionReader reader(in);
  Session s;
  s.header = reader.header();
  while (auto r = reader.next()) s.records.push_back(std::move(*r));
  return s;
}

Session load_session(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open session file '" + path + "'");
  return read_session(in);
}

SessionSummary summarize(const std::vector<SessionRecord>& records) {
  SessionSummary s;
  s.emotion_histogram = {{"Calm", 0}, {"Excited", 0}, {"Stressed", 0}, {"Alert", 0}, {"none", 0}};
  Stats bpm;
  Stats spo2;
  auto add = [](Stats& st, double v) {
    if (st.count == 0) {
      st.min = st.max = v;
    } else {
      st.min = std::min(st.min, v);
      st.max = std::max(st.max, v);
    }
    st.mean += v;
    ++st.count;
  };
  std::size_t assessed = 0;
  std::uint32_t last_tick = 0;
  for (const auto& r : records) {
    if (const auto* v = std::get_if<VitalsEstimate>(&r.payload)) {
      ++s.vitals_ticks;
      last_tick = v->tick_time_ms();
      if (v->contact() != ContactState::Contact) continue;
      ++s.contact_ticks;
      if (v->bpm_avg()) add(bpm, *v->bpm_avg());
      if (v->spo2_pct()) add(spo2, *v->spo2_pct());
    } else if (const auto* e = std::get_if<EmotionRecord>(&r.payload)) {
      ++s.emotion_histogram[std::string(emotion::to_string(e->assessment.state))];
      ++assessed;
    }
  }
  if (s.vitals_ticks == 0) throw EmptySession("session holds no vitals records");
  if (s.contact_ticks == 0) throw EmptySession("session holds no ticks with sensor contact");
  if (assessed > s.vitals_ticks) throw EmptySession("session holds more assessments than vitals ticks");
  s.emotion_histogram["none"] = s.vitals_ticks - assessed;
  s.duration_s = last_tick / 1000.0;
  s.contact_uptime = static_cast<double>(s.contact_ticks) / static_cast<double>(s.vitals_ticks);
  if (bpm.count > 0) {
    bpm.mean /= static_cast<double>(bpm.count);
    s.bpm = bpm;
  }
  if (spo2.count > 0) {
    spo2.mean /= static_cast<double>(spo2.count);
    s.spo2 = spo2;
  }
  return s;
}

std::string render_text_report(const SessionSummary& s) {
  std::string out;
  auto stats_line = [&](const char* name, const std::optional<Stats>& st, const char* unit) {
    if (!st) {
      out += fmt::format("{:<10} n/a\n", name);
      return;
    }
    out += fmt::format("{:<10} mean {:.2f}{} min {:.2f}{} max {:.2f}{} ({} ticks)\n", name, st->mean, unit,
                       st->min, unit, st->max, unit, st->count);
  };
  out += "session summary\n";
  out += fmt::format("{:<10} {:.3f} s\n", "duration", s.duration_s);
  out += fmt::format("{:<10} {} vitals, {} with contact\n", "ticks", s.vitals_ticks, s.contact_ticks);
  out += fmt::format("{:<10} {:.4f}\n", "uptime", s.contact_uptime);
  stats_line("bpm_avg", s.bpm, "");
  stats_line("spo2", s.spo2, "%");
  out += fmt::format("{:<10}", "emotion");
  for (const char* state : {"Calm", "Excited", "Stressed", "Alert", "none"}) {
    out += fmt::format(" {}={}", state, s.emotion_histogram.at(state));
  }
  out += '\n';
  return out;
}

std::string render_svg_report(const std::vector<SessionRecord>& records, const SessionSummary& summary) {
  struct Point {
    double t;
    double v;
  };
  std::vector<Point> bpm;
  std::vector<Point> spo2;
  for (const auto& r : records) {
    const auto* v = std::get_if<VitalsEstimate>(&r.payload);
    if (!v || v->contact() != ContactState::Contact) continue;
    const double t = v->tick_time_ms() / 1000.0;
    if (v->bpm_avg()) bpm.push_back({t, *v->bpm_avg()});
    if (v->spo2_pct()) spo2.push_back({t, *v->spo2_pct()});
  }

  constexpr double kWidth = 800;
  constexpr double kPanel = 180;
  constexpr double kLeft = 60;
  constexpr double kRight = 20;
  constexpr double kTop = 30;
  constexpr double kGap = 50;
  const double t_max = std::max(summary.duration_s, 1.0);
  const double plot_w = kWidth - kLeft - kRight;

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      kWidth, kTop + 2 * kPanel + kGap + 40, kWidth, kTop + 2 * kPanel + kGap + 40);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto panel = [&](const std::vector<Point>& pts, double top, const char* title, const char* color) {
    double lo = 0.0;
    double hi = 1.0;
    if (!pts.empty()) {
      lo = hi = pts.front().v;
      for (const auto& p : pts) {
        lo = std::min(lo, p.v);
        hi = std::max(hi, p.v);
      }
    }
    // Flat series still get a readable vertical scale.
    lo -= 1.0;
    hi += 1.0;
    svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"#888\"/>\n",
                       kLeft, top, plot_w, kPanel);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n", kLeft,
                       top - 8, title);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.1f}</text>\n",
                       kLeft - 6, top + 10, hi);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.1f}</text>\n",
                       kLeft - 6, top + kPanel, lo);
    if (pts.empty()) return;
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = kLeft + plot_w * pts[i].t / t_max;
      const double y = top + kPanel * (hi - pts[i].v) / (hi - lo);
      svg += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", x, y);
    }
    svg += "\"/>\n";
  };
  panel(bpm, kTop, "average BPM", "#c0392b");
  panel(spo2, kTop + kPanel + kGap, "SpO2 (%)", "#2471a3");
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\">0 s</text>\n", kLeft,
                     kTop + 2 * kPanel + kGap + 20);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.1f} s</text>\n",
                     kWidth - kRight, kTop + 2 * kPanel + kGap + 20, t_max);
  svg += "</svg>\n";
  return svg;
}

ReplayCheck verify_replay(const Session& session) {
  std::vector<SampleFrame> frames;
  std::vector<std::string> stored;
  for (const auto& r : session.records) {
    if (const auto* f = std::get_if<SampleFrame>(&r.payload)) frames.push_back(*f);
    if (r.kind() == RecordKind::Vitals) stored.push_back(format_payload(r));
  }
  const auto recomputed = vitals::run_pipeline(frames, session.header.config);
  ReplayCheck check;
  check.stored_vitals = stored.size();
  check.recomputed_vitals = recomputed.size();
  for (std::size_t i = 0; i < std::min(stored.size(), recomputed.size()); ++i) {
    if (format_payload(SessionRecord{0, recomputed[i]}) != stored[i]) {
      check.first_mismatch = i;
      break;
    }
  }
  return check;
}

}  // namespace pawpulse::session
