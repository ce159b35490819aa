#include "pawpulse/wire.hpp"

#include <string>

namespace pawpulse::wire {
namespace {

constexpr std::size_t kHeaderSize = 4;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : bytes) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

std::string_view to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "ok";
    case DecodeStatus::BadSync: return "bad sync";
    case DecodeStatus::BadVersion: return "bad version";
    case DecodeStatus::BadFlags: return "bad flags";
    case DecodeStatus::BadCrc: return "bad CRC";
    case DecodeStatus::BadRange: return "value out of range";
    case DecodeStatus::Truncated: return "truncated";
  }
  return "unknown";
}

void append_frame(std::vector<std::uint8_t>& out, const SampleFrame& frame) {
  validate_frame(frame);
  const std::size_t start = out.size();
  out.push_back(kSync0);
  out.push_back(kSync1);
  out.push_back(kVersion);
  out.push_back(frame.temperature_dc ? kFlagTemperature : 0);
  put_u32(out, frame.timestamp_ms);
  put_u32(out, frame.red);
  put_u32(out, frame.ir);
  if (frame.temperature_dc) put_u16(out, static_cast<std::uint16_t>(*frame.temperature_dc));
  const auto covered = std::span<const std::uint8_t>(out).subspan(start + 2);
  put_u16(out, crc16_ccitt_false(covered));
}

std::vector<std::uint8_t> encode_frame(const SampleFrame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kFrameSizeWithTemperature);
  append_frame(out, frame);
  return out;
}

DecodeResult try_decode(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  if (bytes.size() < 2) {
    r.status = !bytes.empty() && bytes[0] != kSync0 ? DecodeStatus::BadSync : DecodeStatus::Truncated;
    return r;
  }
  if (bytes[0] != kSync0 || bytes[1] != kSync1) {
    r.status = DecodeStatus::BadSync;
    return r;
  }
  if (bytes.size() < kHeaderSize) {
    r.status = DecodeStatus::Truncated;
    return r;
  }
  if (bytes[2] != kVersion) {
    r.status = DecodeStatus::BadVersion;
    return r;
  }
  const std::uint8_t flags = bytes[3];
  if (flags & ~kFlagTemperature) {
    r.status = DecodeStatus::BadFlags;
    return r;
  }
  const bool has_temp = flags & kFlagTemperature;
  r.frame_size = has_temp ? kFrameSizeWithTemperature : kFrameSize;
  if (bytes.size() < r.frame_size) {
    r.status = DecodeStatus::Truncated;
    return r;
  }
  const std::size_t crc_at = r.frame_size - 2;
  if (crc16_ccitt_false(bytes.subspan(2, crc_at - 2)) != get_u16(bytes, crc_at)) {
    r.status = DecodeStatus::BadCrc;
    return r;
  }
  r.frame.timestamp_ms = get_u32(bytes, 4);
  r.frame.red = get_u32(bytes, 8);
  r.frame.ir = get_u32(bytes, 12);
  if (has_temp) r.frame.temperature_dc = static_cast<std::int16_t>(get_u16(bytes, 16));
  r.status = (r.frame.red > kAdcMax || r.frame.ir > kAdcMax) ? DecodeStatus::BadRange : DecodeStatus::Ok;
  return r;
}

SampleFrame decode_frame(std::span<const std::uint8_t> bytes) {
  auto r = try_decode(bytes);
  if (r.status != DecodeStatus::Ok) {
    throw WireError(r.status, "cannot decode frame: " + std::string(to_string(r.status)));
  }
  return r.frame;
}

std::vector<SampleFrame> StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  return scan(false);
}

std::vector<SampleFrame> StreamDecoder::finish() { return scan(true); }

std::vector<SampleFrame> StreamDecoder::scan(bool final) {
  std::vector<SampleFrame> frames;
  const std::span<const std::uint8_t> buf(buffer_);
  std::size_t pos = 0;
  while (pos < buf.size()) {
    if (buf[pos] != kSync0) {
      ++pos;
      ++skipped_;
      continue;
    }
    const auto r = try_decode(buf.subspan(pos));
    if (r.status == DecodeStatus::Ok) {
      frames.push_back(r.frame);
      pos += r.frame_size;
      continue;
    }
    if (r.status == DecodeStatus::Truncated && !final) break;
    if (r.status != DecodeStatus::BadSync) issues_.push_back({base_offset_ + pos, r.status});
    ++pos;
    ++skipped_;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  base_offset_ += pos;
  return frames;
}

ResyncResult resync(std::span<const std::uint8_t> bytes) {
  StreamDecoder decoder;
  ResyncResult out;
  out.frames = decoder.feed(bytes);
  for (auto& f : decoder.finish()) out.frames.push_back(f);
  out.skipped_bytes = decoder.skipped_bytes();
  out.issues = decoder.issues();
  return out;
}

}  // namespace pawpulse::wire
