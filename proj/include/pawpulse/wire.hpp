#pragma once

// Device-to-host binary framing.
//
//   offset  size  field
//   0       2     sync 0xA5 0x5A
//   2       1     version (0x01)
//   3       1     flags (bit 0: temperature present; other bits reserved, zero)
//   4       4     timestamp_ms, u32 LE
//   8       4     red, u32 LE
//   12      4     ir, u32 LE
//   16      2     temperature in 0.1 degC, i16 LE (only when flag bit 0 set)
//   16/18   2     CRC-16/CCITT-FALSE over bytes 2.. end of payload, u16 LE
//
// Frames are 18 bytes without temperature and 20 with.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pawpulse/errors.hpp"
#include "pawpulse/signal_core.hpp"

namespace pawpulse::wire {

inline constexpr std::uint8_t kSync0 = 0xA5;
inline constexpr std::uint8_t kSync1 = 0x5A;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kFlagTemperature = 0x01;
inline constexpr std::size_t kFrameSize = 18;
inline constexpr std::size_t kFrameSizeWithTemperature = 20;

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

enum class DecodeStatus { Ok, BadSync, BadVersion, BadFlags, BadCrc, BadRange, Truncated };

std::string_view to_string(DecodeStatus s);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Truncated;
  SampleFrame frame;
  /// Bytes the frame occupies when its header could be read, else 0.
  std::size_t frame_size = 0;
};

class WireError : public Error {
 public:
  WireError(DecodeStatus status, const std::string& what) : Error(what), status_(status) {}
  DecodeStatus status() const noexcept { return status_; }

 private:
  DecodeStatus status_;
};

/// Throws RangeError when the frame fails validation.
std::vector<std::uint8_t> encode_frame(const SampleFrame& frame);
void append_frame(std::vector<std::uint8_t>& out, const SampleFrame& frame);

/// Decodes the frame at the start of `bytes` without throwing.
DecodeResult try_decode(std::span<const std::uint8_t> bytes);

/// Decodes the frame at the start of `bytes`; throws WireError otherwise.
SampleFrame decode_frame(std::span<const std::uint8_t> bytes);

struct DecodeIssue {
  std::uint64_t offset = 0;
  DecodeStatus status = DecodeStatus::BadCrc;
};

/// Incremental resynchronizing decoder for one byte stream.
///
/// Scans for the sync pattern and attempts a decode; on failure it skips a
/// single byte, so a valid frame is never lost once it is fully buffered.
/// Failed attempts at a sync pattern are recorded as issues.
class StreamDecoder {
 public:
  /// Appends bytes and returns every frame that became decodable.
  std::vector<SampleFrame> feed(std::span<const std::uint8_t> bytes);
  /// Ends the stream. Bytes held back waiting for more input are rescanned
  /// and whatever cannot be decoded is counted as skipped.
  std::vector<SampleFrame> finish();

  std::uint64_t skipped_bytes() const { return skipped_; }
  std::uint64_t consumed_bytes() const { return base_offset_; }
  const std::vector<DecodeIssue>& issues() const { return issues_; }

 private:
  std::vector<SampleFrame> scan(bool final);

  std::vector<std::uint8_t> buffer_;
  std::uint64_t base_offset_ = 0;
  std::uint64_t skipped_ = 0;
  std::vector<DecodeIssue> issues_;
};

struct ResyncResult {
  std::vector<SampleFrame> frames;
  std::uint64_t skipped_bytes = 0;
  std::vector<DecodeIssue> issues;
};

/// One-shot resynchronizing decode of a complete byte stream.
ResyncResult resync(std::span<const std::uint8_t> bytes);

}  // namespace pawpulse::wire
