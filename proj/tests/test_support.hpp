#pragma once

// Helpers shared by the test binaries.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("pawpulse-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Random valid frame stream with strictly increasing timestamps.
inline std::vector<SampleFrame> random_frames(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::uint32_t> adc(0, kAdcMax);
  std::uniform_int_distribution<std::uint32_t> step(1, 50);
  std::uniform_int_distribution<int> temp(-400, 600);
  std::bernoulli_distribution has_temp(0.5);
  std::vector<SampleFrame> frames;
  std::uint32_t t = std::uniform_int_distribution<std::uint32_t>(0, 1000)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    SampleFrame f;
    f.timestamp_ms = t;
    f.red = adc(rng);
    f.ir = adc(rng);
    if (has_temp(rng)) f.temperature_dc = static_cast<std::int16_t>(temp(rng));
    frames.push_back(f);
    t += step(rng);
  }
  return frames;
}

/// Indices of local maxima of a quantized signal: a strict rise into a run of
/// equal values that is left by a strict fall. The first index of the run is
/// reported. A plateau on a rising slope is not a maximum.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    if (j + 1 < v.size() && v[j + 1] < v[i]) out.push_back(i);
    i = j;
  }
  return out;
}

}  // namespace pawpulse::testing
