#include "pawpulse/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pawpulse/calibration.hpp"
#include "pawpulse/config.hpp"
#include "pawpulse/emotion.hpp"
#include "pawpulse/errors.hpp"
#include "pawpulse/monitor.hpp"
#include "pawpulse/session.hpp"
#include "pawpulse/synth.hpp"
#include "pawpulse/wire.hpp"

namespace pawpulse::cli {
namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args.sets, "override one configuration key, as key=value");
}

PipelineConfig build_config(const ConfigArgs& args, PipelineConfig base = {}) {
  if (!args.path.empty()) base = load_config(args.path, base);
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(base, kv.substr(0, eq), kv.substr(eq + 1));
  }
  base.validate();
  return base;
}

std::optional<std::string> resolve_start_time(const std::string& flag) {
  if (flag.empty()) return std::nullopt;
  if (flag != "now") return flag;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return std::string(buf);
}

std::pair<std::uint32_t, std::uint32_t> parse_window(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("no colon");
    std::size_t used = 0;
    const auto start = std::stoul(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing text");
    const auto duration = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing text");
    return {static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(duration)};
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(flag) + " expects START_MS:DURATION_MS, got '" + text + "'");
  }
}

std::vector<synth::BpmSegment> parse_schedule(const std::string& text) {
  std::vector<synth::BpmSegment> schedule;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      std::size_t used = 0;
      synth::BpmSegment seg;
      seg.start_ms = static_cast<std::uint32_t>(std::stoul(item.substr(0, colon), &used));
      if (used != colon) throw std::invalid_argument("trailing text");
      seg.bpm = std::stod(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) throw std::invalid_argument("trailing text");
      schedule.push_back(seg);
    } catch (const std::logic_error&) {
      throw ConfigError("--schedule expects START_MS:BPM[,START_MS:BPM...], got '" + text + "'");
    }
  }
  if (schedule.empty()) throw ConfigError("--schedule is empty");
  return schedule;
}

std::string optional_value(const std::optional<double>& v, const char* fmt_spec) {
  return v ? fmt::format(fmt::runtime(fmt_spec), *v) : std::string("--");
}

std::string tick_line(const VitalsEstimate& v, const std::optional<emotion::EmotionAssessment>& e) {
  const std::string time = fmt::format("t={:.3f}s", v.tick_time_ms() / 1000.0);
  if (v.contact() == ContactState::NoContact) return time + " no contact";
  std::string line = fmt::format("{} bpm={} avg={} spo2={}", time, optional_value(v.bpm_instant(), "{:.1f}"),
                                 optional_value(v.bpm_avg(), "{:.1f}"), optional_value(v.spo2_pct(), "{:.1f}%"));
  if (v.temperature_c()) line += fmt::format(" temp={:.1f}C", *v.temperature_c());
  line += " contact";
  if (e) {
    line += fmt::format(" emotion={}/{}", emotion::to_string(e->state), emotion::to_string(e->certainty));
  } else {
    line += " emotion=--";
  }
  return line;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  double bpm = 90.0;
  std::string schedule;
  double spo2 = 97.0;
  double seconds = 30.0;
  std::uint64_t seed = 1;
  double fs = 0.0;
  double noise = 0.0;
  double snr = 0.0;
  double ac = 0.02;
  double dc_ir = 120'000.0;
  double dc_red = 0.0;
  double temp = 0.0;
  std::string format = "wire";
  std::string out = "-";
  std::string truth;
  std::vector<std::string> dropouts;
  std::vector<std::string> spikes;
  std::string start_time;
  ConfigArgs config;

  CLI::Option* fs_opt = nullptr;
  CLI::Option* snr_opt = nullptr;
  CLI::Option* dc_red_opt = nullptr;
  CLI::Option* temp_opt = nullptr;
  CLI::Option* schedule_opt = nullptr;
};

void write_truth(const std::string& path, const synth::GroundTruth& truth, const synth::SynthProfile& profile,
                 double seconds, double fs) {
  nlohmann::ordered_json j;
  j["seconds"] = seconds;
  j["fs_hz"] = fs;
  j["seed"] = profile.seed;
  j["spo2_pct"] = profile.true_spo2_pct;
  auto schedule = nlohmann::ordered_json::array();
  for (const auto& seg : profile.bpm_schedule) schedule.push_back({seg.start_ms, seg.bpm});
  j["bpm_schedule"] = schedule;
  j["beat_times_ms"] = truth.beat_times_ms;
  auto spo2 = nlohmann::ordered_json::array();
  for (const auto& [t, v] : truth.spo2_schedule) spo2.push_back({t, v});
  j["spo2_schedule"] = spo2;
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create ground-truth file '" + path + "'");
  file << j.dump(2) << '\n';
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const PipelineConfig config = build_config(a.config);
  synth::SynthProfile profile;
  profile.bpm_schedule = a.schedule_opt->count() ? parse_schedule(a.schedule)
                                               : std::vector<synth::BpmSegment>{{0, a.bpm}};
  profile.true_spo2_pct = a.spo2;
  profile.dc_ir = a.dc_ir;
  if (a.dc_red_opt->count()) profile.dc_red = a.dc_red;
  profile.ac_amplitude_fraction = a.ac;
  profile.seed = a.seed;
  if (a.temp_opt->count()) profile.temperature_c = a.temp;
  profile.noise_std_counts = a.snr_opt->count() ? synth::noise_std_for_snr(profile, a.snr) : a.noise;
  const double fs = a.fs_opt->count() ? a.fs : config.sample_rate_hz;

  auto generated = synth::generate(profile, a.seconds, fs, config.coeffs);
  std::uint64_t artifact_seed = a.seed;
  for (const auto& d : a.dropouts) {
    const auto [at, dur] = parse_window(d, "--dropout");
    generated.frames = synth::inject_artifacts(std::move(generated.frames), synth::ArtifactKind::Dropout, at, dur,
                                               ++artifact_seed);
  }
  for (const auto& s : a.spikes) {
    const auto [at, dur] = parse_window(s, "--spike");
    generated.frames = synth::inject_artifacts(std::move(generated.frames), synth::ArtifactKind::MotionSpike, at,
                                               dur, ++artifact_seed);
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (a.out != "-") {
    file.open(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot create output file '" + a.out + "'");
    sink = &file;
  }
  if (a.format == "wire") {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(generated.frames.size() * wire::kFrameSizeWithTemperature);
    for (const auto& f : generated.frames) wire::append_frame(bytes, f);
    sink->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    session::SessionWriter writer(*sink, {resolve_start_time(a.start_time), config});
    for (const auto& f : generated.frames) writer.append_next(f);
  }
  sink->flush();
  if (!*sink) throw IoError("failed to write simulated frames");

  std::string truth_path = a.truth;
  if (truth_path.empty() && a.out != "-") truth_path = a.out + ".truth.json";
  if (!truth_path.empty()) write_truth(truth_path, generated.truth, profile, a.seconds, fs);
  return kExitOk;
}

// --- process ------------------------------------------------------------------

struct ProcessArgs {
  std::string in = "-";
  std::string format = "auto";
  std::string session;
  std::string rules;
  std::string start_time;
  ConfigArgs config;
};

int cmd_process(const ProcessArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  std::ifstream file;
  std::istream* src = &in;
  if (a.in != "-") {
    file.open(a.in, std::ios::binary);
    if (!file) throw IoError("cannot open input '" + a.in + "'");
    src = &file;
  }
  const bool session_input = a.format == "session" || (a.format == "auto" && src->peek() == '{');

  std::optional<session::SessionReader> reader;
  PipelineConfig base;
  std::optional<std::string> start = resolve_start_time(a.start_time);
  if (session_input) {
    reader.emplace(*src);
    base = reader->header().config;
    if (!start) start = reader->header().start_wall_clock;
  }
  const PipelineConfig config = build_config(a.config, base);
  emotion::RuleTable rules = a.rules.empty() ? emotion::default_rules() : emotion::load_rules(a.rules);
  Monitor monitor(config, std::move(rules), emotion::default_bands());

  std::optional<session::SessionWriter> writer;
  if (!a.session.empty()) writer.emplace(session::SessionWriter::open(a.session, {start, config}));

  std::size_t frames_in = 0;
  std::size_t rejected = 0;
  std::size_t ticks = 0;
  auto emit = [&](std::vector<TickReport> reports) {
    for (auto& r : reports) {
      ++ticks;
      if (writer) {
        for (const auto& f : r.tick.frames) writer->append_next(f);
        writer->append_next(r.vitals);
        if (r.emotion) writer->append_next(session::EmotionRecord{r.vitals.tick_time_ms(), *r.emotion});
      }
      out << tick_line(r.vitals, r.emotion) << '\n';
    }
  };
  auto consume = [&](const SampleFrame& f) {
    ++frames_in;
    try {
      emit(monitor.push(f));
    } catch (const RangeError& e) {
      ++rejected;
      err << "rejected frame: " << e.what() << '\n';
    } catch (const OrderError& e) {
      ++rejected;
      err << "rejected frame: " << e.what() << '\n';
    }
  };

  std::uint64_t skipped = 0;
  if (reader) {
    while (auto record = reader->next()) {
      if (const auto* f = std::get_if<SampleFrame>(&record->payload)) consume(*f);
    }
  } else {
    wire::StreamDecoder decoder;
    std::size_t reported = 0;
    auto report_issues = [&] {
      for (; reported < decoder.issues().size(); ++reported) {
        const auto& issue = decoder.issues()[reported];
        err << "decode error at byte " << issue.offset << ": " << wire::to_string(issue.status) << '\n';
      }
    };
    std::vector<char> chunk(1 << 14);
    while (*src) {
      src->read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
      const auto n = static_cast<std::size_t>(src->gcount());
      if (n == 0) break;
      const auto* bytes = reinterpret_cast<const std::uint8_t*>(chunk.data());
      for (const auto& f : decoder.feed({bytes, n})) consume(f);
      report_issues();
    }
    for (const auto& f : decoder.finish()) consume(f);
    report_issues();
    skipped = decoder.skipped_bytes();
  }
  emit(monitor.finish());
  err << fmt::format("processed {} frames in {} ticks, skipped {} bytes, rejected {} frames\n", frames_in, ticks,
                     skipped, rejected);
  return kExitOk;
}

// --- replay -------------------------------------------------------------------

struct ReplayArgs {
  std::string session;
  bool quiet = false;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream file(a.session, std::ios::binary);
  if (!file) throw IoError("cannot open session file '" + a.session + "'");
  session::Session s;
  std::optional<ParseError> failure;
  {
    session::SessionReader reader(file);
    s.header = reader.header();
    try {
      while (auto r = reader.next()) s.records.push_back(std::move(*r));
    } catch (const ParseError& e) {
      failure = e;
    }
  }

  std::map<std::uint32_t, emotion::EmotionAssessment> assessments;
  for (const auto& r : s.records) {
    if (const auto* e = std::get_if<session::EmotionRecord>(&r.payload)) assessments[e->tick_time_ms] = e->assessment;
  }
  if (!a.quiet) {
    for (const auto& r : s.records) {
      const auto* v = std::get_if<VitalsEstimate>(&r.payload);
      if (!v) continue;
      std::optional<emotion::EmotionAssessment> e;
      if (auto it = assessments.find(v->tick_time_ms()); it != assessments.end()) e = it->second;
      out << tick_line(*v, e) << '\n';
    }
  }
  if (failure) {
    err << "error: session " << failure->what() << " (" << s.records.size() << " records read before it)\n";
    return kExitData;
  }

  const auto check = session::verify_replay(s);
  if (!check.identical()) {
    err << fmt::format("replay mismatch: {} stored vitals, {} recomputed", check.stored_vitals,
                       check.recomputed_vitals);
    if (check.first_mismatch) err << fmt::format(", first difference at vitals record {}", *check.first_mismatch);
    err << '\n';
    return kExitData;
  }
  out << fmt::format("replay: {} records, {} vitals recomputed identically\n", s.records.size(),
                     check.recomputed_vitals);
  return kExitOk;
}

// --- calibrate ----------------------------------------------------------------

struct CalibrateArgs {
  std::string pairs;
  std::string write_config;
  ConfigArgs config;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream file(a.pairs);
  if (!file) throw IoError("cannot open pairs file '" + a.pairs + "'");
  const auto pairs = calibration::parse_pairs(file);
  std::optional<calibration::CalibrationFit> fit;
  try {
    fit = calibration::fit_calibration(pairs);
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateFit& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << fmt::format("a={:.6f} b={:.6f} rms={:.6f} n={}\n", fit->coeffs.a(), fit->coeffs.b(), fit->rms, fit->count);
  if (!a.write_config.empty()) {
    PipelineConfig config = build_config(a.config);
    config.coeffs = fit->coeffs;
    std::ofstream cfg(a.write_config, std::ios::trunc);
    if (!cfg) throw IoError("cannot write config file '" + a.write_config + "'");
    write_config(cfg, config);
    if (!cfg) throw IoError("failed to write config file '" + a.write_config + "'");
  }
  return kExitOk;
}

// --- report -------------------------------------------------------------------

struct ReportArgs {
  std::string session;
  std::string format = "text";
  std::string out = "-";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto s = session::load_session(a.session);
  const auto summary = session::summarize(s.records);
  const std::string body =
      a.format == "svg" ? session::render_svg_report(s.records, summary) : session::render_text_report(summary);
  if (a.out == "-") {
    out << body;
  } else {
    std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot create report file '" + a.out + "'");
    file << body;
    if (!file) throw IoError("failed to write report file '" + a.out + "'");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Red/IR pulse-sensor vitals: simulate, process, replay, calibrate, report", "pawpulse"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic sensor stream with ground truth");
  simulate->add_option("--bpm", sim.bpm, "constant true heart rate")->check(CLI::Range(30.0, 220.0));
  sim.schedule_opt = simulate->add_option("--schedule", sim.schedule, "piecewise heart rate, START_MS:BPM,...");
  simulate->add_option("--spo2", sim.spo2, "true SpO2 percent")->check(CLI::Range(70.0, 100.0));
  simulate->add_option("--seconds", sim.seconds, "stream duration")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "noise and artifact seed");
  sim.fs_opt = simulate->add_option("--fs", sim.fs, "sample rate in Hz (default: config sample_rate_hz)")
                   ->check(CLI::Range(1.0, 1000.0));
  auto* noise_opt = simulate->add_option("--noise", sim.noise, "white noise std in counts")->check(CLI::NonNegativeNumber);
  sim.snr_opt = simulate->add_option("--snr", sim.snr, "noise level as SNR in dB against the IR pulse")->excludes(noise_opt);
  simulate->add_option("--ac", sim.ac, "pulse amplitude as a fraction of baseline")->check(CLI::Range(1e-6, 0.1));
  simulate->add_option("--dc-ir", sim.dc_ir, "IR baseline in counts")->check(CLI::PositiveNumber);
  sim.dc_red_opt = simulate->add_option("--dc-red", sim.dc_red, "red baseline; must agree with --spo2");
  sim.temp_opt = simulate->add_option("--temp", sim.temp, "body temperature in degC");
  simulate->add_option("--format", sim.format, "wire or session")->check(CLI::IsMember({"wire", "session"}));
  simulate->add_option("--out", sim.out, "output path, - for stdout");
  simulate->add_option("--truth", sim.truth, "ground-truth JSON path (default: OUT.truth.json)");
  simulate->add_option("--dropout", sim.dropouts, "sensor-off window START_MS:DURATION_MS");
  simulate->add_option("--spike", sim.spikes, "motion artifact window START_MS:DURATION_MS");
  simulate->add_option("--start-time", sim.start_time, "session wall-clock start (ISO-8601 or 'now')");
  add_config_options(simulate, sim.config);

  ProcessArgs proc;
  auto* process = app.add_subcommand("process", "estimate vitals from a wire or session stream");
  process->add_option("--in", proc.in, "input path, - for stdin");
  process->add_option("--format", proc.format, "auto, wire or session")->check(CLI::IsMember({"auto", "wire", "session"}));
  process->add_option("--session", proc.session, "session file to write");
  process->add_option("--rules", proc.rules, "emotion rule file")->check(CLI::ExistingFile);
  process->add_option("--start-time", proc.start_time, "session wall-clock start (ISO-8601 or 'now')");
  add_config_options(process, proc.config);

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "print a session and verify its vitals by recomputation");
  replay->add_option("session", rep.session, "session file")->required();
  replay->add_flag("--quiet", rep.quiet, "only print the verification result");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "fit SpO2 = a - b * ratio to reference pairs");
  calibrate->add_option("pairs", cal.pairs, "file of ratio,reference_spo2 lines")->required();
  calibrate->add_option("--write-config", cal.write_config, "write a config file with the fitted coefficients");
  add_config_options(calibrate, cal.config);

  ReportArgs rpt;
  auto* report = app.add_subcommand("report", "summarize a session as text or SVG");
  report->add_option("session", rpt.session, "session file")->required();
  report->add_option("--format", rpt.format, "text or svg")->check(CLI::IsMember({"text", "svg"}));
  report->add_option("--out", rpt.out, "output path, - for stdout");

  std::vector<const char*> argv{"pawpulse"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (process->parsed()) return cmd_process(proc, in, out, err);
    if (replay->parsed()) return cmd_replay(rep, out, err);
    if (calibrate->parsed()) return cmd_calibrate(cal, out, err);
    if (report->parsed()) return cmd_report(rpt, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace pawpulse::cli
