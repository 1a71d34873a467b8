#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnslab {

enum class WireErrc {
  label_too_long,
  name_too_long,
  pointer_loop,
  truncated_name,
  offset_out_of_range,
  bad_escape,
  empty_label,
  truncated,
  malformed_record,
  bad_rdata,
};

inline const char* to_string(WireErrc e) {
  switch (e) {
    case WireErrc::label_too_long: return "label_too_long";
    case WireErrc::name_too_long: return "name_too_long";
    case WireErrc::pointer_loop: return "pointer_loop";
    case WireErrc::truncated_name: return "truncated_name";
    case WireErrc::offset_out_of_range: return "offset_out_of_range";
    case WireErrc::bad_escape: return "bad_escape";
    case WireErrc::empty_label: return "empty_label";
    case WireErrc::truncated: return "truncated";
    case WireErrc::malformed_record: return "malformed_record";
    case WireErrc::bad_rdata: return "bad_rdata";
  }
  return "unknown";
}

/// Hard wire-format error. Soft conditions (partial parses) are reported
/// through ParseResult instead.
class WireError : public std::runtime_error {
public:
  WireError(WireErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  WireErrc code() const { return code_; }

private:
  WireErrc code_;
};

/// Bounds-checked big-endian cursor over an immutable buffer.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> buf, std::size_t offset = 0)
      : buf_(buf), pos_(offset) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }
  bool at_end() const { return pos_ >= buf_.size(); }

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((buf_[pos_] << 8) | buf_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = (static_cast<std::uint32_t>(buf_[pos_]) << 24) |
                      (static_cast<std::uint32_t>(buf_[pos_ + 1]) << 16) |
                      (static_cast<std::uint32_t>(buf_[pos_ + 2]) << 8) |
                      static_cast<std::uint32_t>(buf_[pos_ + 3]);
    pos_ += 4;
    return v;
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw WireError(WireErrc::truncated, "buffer underrun");
  }
  std::span<const std::uint8_t> buf_;
  std::size_t pos_;
};

/// Append-only big-endian buffer builder.
class ByteWriter {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  void u32(std::uint32_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 24));
    out_.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out_.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void bytes(const std::string& b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void patch_u16(std::size_t offset, std::uint16_t v) {
    out_.at(offset) = static_cast<std::uint8_t>(v >> 8);
    out_.at(offset + 1) = static_cast<std::uint8_t>(v & 0xFF);
  }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  const std::vector<std::uint8_t>& data() const { return out_; }

private:
  std::vector<std::uint8_t> out_;
};

/// TCP transport framing: 2-byte length prefix. Transport-layer concern only;
/// the message codec itself never sees the prefix.
inline std::vector<std::uint8_t> frame_tcp(std::span<const std::uint8_t> payload) {
  if (payload.size() > 0xFFFF) throw WireError(WireErrc::truncated, "payload exceeds tcp frame");
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 2);
  out.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(payload.size() & 0xFF));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

/// Extracts one framed message; returns empty if the frame is incomplete.
inline std::vector<std::uint8_t> unframe_tcp(std::span<const std::uint8_t> buf) {
  if (buf.size() < 2) return {};
  std::size_t n = (static_cast<std::size_t>(buf[0]) << 8) | buf[1];
  if (buf.size() < 2 + n) return {};
  return std::vector<std::uint8_t>(buf.begin() + 2, buf.begin() + 2 + n);
}

}  // namespace dnslab
