#include "pawpulse/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "pawpulse/errors.hpp"

namespace pawpulse {
namespace {

struct Field {
  std::string_view name;
  bool integral;
  std::function<double(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, double)> set;
};

template <typename T>
Field real_field(std::string_view name, T PipelineConfig::*member) {
  return {name, false, [member](const PipelineConfig& c) { return static_cast<double>(c.*member); },
          [member](PipelineConfig& c, double v) { c.*member = static_cast<T>(v); }};
}

Field count_field(std::string_view name, std::uint32_t PipelineConfig::*member) {
  return {name, true, [member](const PipelineConfig& c) { return static_cast<double>(c.*member); },
          [member](PipelineConfig& c, double v) { c.*member = static_cast<std::uint32_t>(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      real_field("sample_rate_hz", &PipelineConfig::sample_rate_hz),
      real_field("bpm_valid_min", &PipelineConfig::bpm_valid_min),
      real_field("bpm_valid_max", &PipelineConfig::bpm_valid_max),
      count_field("avg_window_beats", &PipelineConfig::avg_window_beats),
      count_field("contact_ir_threshold", &PipelineConfig::contact_ir_threshold),
      {"coeff_a", false, [](const PipelineConfig& c) { return c.coeffs.a(); },
       [](PipelineConfig& c, double v) { c.coeffs = CalibrationCoeffs(v, c.coeffs.b()); }},
      {"coeff_b", false, [](const PipelineConfig& c) { return c.coeffs.b(); },
       [](PipelineConfig& c, double v) { c.coeffs = CalibrationCoeffs(c.coeffs.a(), v); }},
      count_field("tick_interval_ms", &PipelineConfig::tick_interval_ms),
      real_field("dc_window_s", &PipelineConfig::dc_window_s),
      count_field("smooth_kernel", &PipelineConfig::smooth_kernel),
      real_field("outlier_z", &PipelineConfig::outlier_z),
      real_field("outlier_window_s", &PipelineConfig::outlier_window_s),
      count_field("refractory_ms", &PipelineConfig::refractory_ms),
      real_field("threshold_fraction", &PipelineConfig::threshold_fraction),
      real_field("peak_half_life_ms", &PipelineConfig::peak_half_life_ms),
      count_field("ratio_window_ms", &PipelineConfig::ratio_window_ms),
  };
  return table;
}

const Field& find_field(std::string_view key) {
  const auto& table = fields();
  auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name == key; });
  if (it == table.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return *it;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const auto& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

bool config_key_is_integral(std::string_view key) { return find_field(key).integral; }

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  const Field& field = find_field(key);
  value = trim(value);
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  if (field.integral) {
    std::uint64_t parsed = 0;
    auto [ptr, ec] = std::from_chars(begin, end, parsed);
    if (ec != std::errc{} || ptr != end || parsed > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError("key '" + std::string(key) + "' expects a non-negative integer, got '" +
                        std::string(value) + "'");
    }
    field.set(config, static_cast<double>(parsed));
  } else {
    double parsed = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, parsed);
    if (ec != std::errc{} || ptr != end) {
      throw ConfigError("key '" + std::string(key) + "' expects a number, got '" +
                        std::string(value) + "'");
    }
    field.set(config, parsed);
  }
}

std::string get_config_value(const PipelineConfig& config, std::string_view key) {
  const Field& field = find_field(key);
  const double v = field.get(config);
  if (field.integral) return fmt::format("{}", static_cast<std::uint32_t>(v));
  return fmt::format("{}", v);
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const auto key = trim(view.substr(0, eq));
    try {
      set_config_value(base, key, view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const PipelineConfig& config) {
  for (auto key : config_keys()) out << key << '=' << get_config_value(config, key) << '\n';
}

}  // namespace pawpulse
