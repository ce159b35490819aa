#include <doctest.h>

#include <cstring>
#include <random>
#include <string>

#include "pawpulse/wire.hpp"
#include "test_support.hpp"

using namespace pawpulse;
using namespace pawpulse::wire;

namespace {

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 0xF];
  }
  return s;
}

std::vector<std::uint8_t> concat(const std::vector<SampleFrame>& frames) {
  std::vector<std::uint8_t> out;
  for (const auto& f : frames) append_frame(out, f);
  return out;
}

}  // namespace

TEST_CASE("CRC check value") {
  const std::string check = "123456789";
  std::vector<std::uint8_t> bytes(check.begin(), check.end());
  CHECK(crc16_ccitt_false(bytes) == 0x29B1);
  CHECK(crc16_ccitt_false({}) == 0xFFFF);
}

TEST_CASE("zero frame layout") {
  const auto bytes = encode_frame({0, 0, 0, {}});
  REQUIRE(bytes.size() == kFrameSize);
  CHECK(bytes[0] == 0xA5);
  CHECK(bytes[1] == 0x5A);
  CHECK(bytes[2] == 0x01);
  CHECK(bytes[3] == 0x00);
  for (std::size_t i = 4; i < 16; ++i) CHECK(bytes[i] == 0);
  CHECK(hex(bytes) == "a55a01000000000000000000000000000bd2");
}

TEST_CASE("temperature frame layout") {
  const SampleFrame f{1234, 30'000, 60'000, std::int16_t{385}};
  const auto bytes = encode_frame(f);
  REQUIRE(bytes.size() == kFrameSizeWithTemperature);
  CHECK(bytes[3] == kFlagTemperature);
  CHECK(hex(bytes) == "a55a0101d20400003075000060ea00008101354e");
  CHECK(decode_frame(bytes) == f);
}

TEST_CASE("encode validates") {
  CHECK_THROWS_AS(encode_frame({0, kAdcMax + 1, 0, {}}), RangeError);
  CHECK_THROWS_AS(encode_frame({0, 0, kAdcMax + 1, {}}), RangeError);
}

TEST_CASE("decode errors are distinguishable") {
  auto bytes = encode_frame({77, 1000, 2000, {}});
  auto status = [](std::vector<std::uint8_t> b) { return try_decode(b).status; };
  CHECK(status(bytes) == DecodeStatus::Ok);
  auto b = bytes;
  b[0] = 0x00;
  CHECK(status(b) == DecodeStatus::BadSync);
  b = bytes;
  b[2] = 0x02;
  CHECK(status(b) == DecodeStatus::BadVersion);
  b = bytes;
  b[3] = 0x80;
  CHECK(status(b) == DecodeStatus::BadFlags);
  b = bytes;
  b[9] ^= 0x10;
  CHECK(status(b) == DecodeStatus::BadCrc);
  b = bytes;
  b.pop_back();
  CHECK(status(b) == DecodeStatus::Truncated);

  // A well-formed frame carrying an over-range channel.
  std::vector<std::uint8_t> wide = bytes;
  const std::uint32_t big = kAdcMax + 1;
  std::memcpy(&wide[8], &big, 4);
  const auto crc = crc16_ccitt_false(std::span(wide).subspan(2, 14));
  wide[16] = crc & 0xFF;
  wide[17] = crc >> 8;
  CHECK(status(wide) == DecodeStatus::BadRange);
  try {
    decode_frame(wide);
    FAIL("expected WireError");
  } catch (const WireError& e) {
    CHECK(e.status() == DecodeStatus::BadRange);
  }
}

TEST_CASE("round trip over random frames") {
  std::mt19937_64 rng(123);
  for (const auto& f : testing::random_frames(rng, 20'000)) {
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == (f.temperature_dc ? kFrameSizeWithTemperature : kFrameSize));
    const auto r = try_decode(bytes);
    REQUIRE(r.status == DecodeStatus::Ok);
    CHECK(r.frame == f);
    CHECK(r.frame_size == bytes.size());
  }
}

TEST_CASE("every single-byte corruption is detected") {
  std::mt19937_64 rng(5);
  for (const auto& f : testing::random_frames(rng, 8)) {
    const auto bytes = encode_frame(f);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      for (int v = 0; v < 256; ++v) {
        if (v == bytes[i]) continue;
        auto b = bytes;
        b[i] = static_cast<std::uint8_t>(v);
        const auto r = try_decode(b);
        CHECK(r.status != DecodeStatus::Ok);
        if (i >= 4) CHECK(r.status == DecodeStatus::BadCrc);
      }
    }
  }
}

TEST_CASE("every single-bit flip in the payload is a CRC error") {
  const auto bytes = encode_frame({4242, 99'999, 150'000, std::int16_t{-12}});
  for (std::size_t i = 4; i < bytes.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      auto b = bytes;
      b[i] ^= static_cast<std::uint8_t>(1u << bit);
      CHECK(try_decode(b).status == DecodeStatus::BadCrc);
    }
  }
}

TEST_CASE("resync after a garbage prefix") {
  const std::vector<SampleFrame> frames{{0, 1, 2, {}}, {10, 3, 4, std::int16_t{385}}, {20, 5, 6, {}}};
  std::vector<std::uint8_t> stream{0x00, 0xA5, 0x13, 0xA5, 0x5A, 0x7F, 0xFF};
  const auto payload = concat(frames);
  stream.insert(stream.end(), payload.begin(), payload.end());
  const auto r = resync(stream);
  CHECK(r.frames == frames);
  CHECK(r.skipped_bytes == 7);
}

TEST_CASE("resync of pure garbage") {
  std::vector<std::uint8_t> junk(500);
  std::mt19937_64 rng(8);
  for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
  const auto r = resync(junk);
  CHECK(r.frames.empty());
  CHECK(r.skipped_bytes == junk.size());
  CHECK(resync({}).skipped_bytes == 0);
}

TEST_CASE("sync pattern inside a payload does not split the frame") {
  // Little-endian 0x5AA5 in the red field places A5 5A at offsets 8-9.
  const SampleFrame f{0x5AA5, 0x5AA5, 0x5AA5, {}};
  const auto bytes = encode_frame(f);
  REQUIRE(bytes[8] == 0xA5);
  REQUIRE(bytes[9] == 0x5A);
  const auto r = resync(bytes);
  REQUIRE(r.frames.size() == 1);
  CHECK(r.frames[0] == f);
  CHECK(r.skipped_bytes == 0);

  // Also when the frame follows a false start of the pattern.
  std::vector<std::uint8_t> stream{0xA5, 0x5A, 0x01};
  stream.insert(stream.end(), bytes.begin(), bytes.end());
  const auto r2 = resync(stream);
  REQUIRE(r2.frames.size() == 1);
  CHECK(r2.frames[0] == f);
  CHECK(r2.skipped_bytes == 3);
}

TEST_CASE("clean concatenation decodes with zero skipped bytes") {
  std::mt19937_64 rng(31);
  const auto frames = testing::random_frames(rng, 3000);
  const auto r = resync(concat(frames));
  CHECK(r.frames == frames);
  CHECK(r.skipped_bytes == 0);
  CHECK(r.issues.empty());
}

TEST_CASE("only the corrupted frame is lost") {
  std::mt19937_64 rng(32);
  const auto frames = testing::random_frames(rng, 200);
  auto bytes = concat(frames);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < 100; ++i) offset += frames[i].temperature_dc ? 20 : 18;
  bytes[offset + 6] ^= 0x55;
  const auto r = resync(bytes);
  auto expected = frames;
  expected.erase(expected.begin() + 100);
  CHECK(r.frames == expected);
  CHECK(r.skipped_bytes == (frames[100].temperature_dc ? 20u : 18u));
  REQUIRE_FALSE(r.issues.empty());
  CHECK(r.issues.front().offset == offset);
  CHECK(r.issues.front().status == DecodeStatus::BadCrc);
}

TEST_CASE("streaming decoder matches one-shot resync for any chunking") {
  std::mt19937_64 rng(33);
  const auto frames = testing::random_frames(rng, 300);
  auto bytes = concat(frames);
  for (int i = 0; i < 40; ++i) bytes[rng() % bytes.size()] = static_cast<std::uint8_t>(rng());
  bytes.insert(bytes.begin(), {0x12, 0xA5});
  bytes.push_back(0xA5);
  bytes.push_back(0x5A);
  const auto expected = resync(bytes);
  for (std::size_t chunk : {1u, 2u, 7u, 18u, 19u, 64u, 1000u}) {
    CAPTURE(chunk);
    StreamDecoder dec;
    std::vector<SampleFrame> got;
    for (std::size_t pos = 0; pos < bytes.size(); pos += chunk) {
      const auto n = std::min(chunk, bytes.size() - pos);
      for (auto& f : dec.feed(std::span(bytes).subspan(pos, n))) got.push_back(f);
    }
    for (auto& f : dec.finish()) got.push_back(f);
    CHECK(got == expected.frames);
    CHECK(dec.skipped_bytes() == expected.skipped_bytes);
    CHECK(dec.consumed_bytes() == bytes.size());
  }
}
