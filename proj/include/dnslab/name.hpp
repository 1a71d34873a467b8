#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "dnslab/bytes.hpp"

namespace dnslab {

constexpr std::size_t kMaxLabelLen = 63;
constexpr std::size_t kMaxNameWireLen = 255;
constexpr int kMaxPointerHops = 128;

/// A domain name as an ordered list of raw labels. Labels are byte strings:
/// 0x00 and 0x2E are legal label content here, which is exactly the property
/// the naive flattening below gets wrong.
struct DnsName {
  std::vector<std::string> labels;

  bool is_root() const { return labels.empty(); }
  bool operator==(const DnsName&) const = default;
};

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](char c) { return ascii_lower(c); });
  return out;
}

/// Case-insensitive for ASCII letters, byte-exact otherwise.
inline bool names_equal_ci(const DnsName& a, const DnsName& b) {
  if (a.labels.size() != b.labels.size()) return false;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const std::string& x = a.labels[i];
    const std::string& y = b.labels[i];
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (ascii_lower(x[j]) != ascii_lower(y[j])) return false;
  }
  return true;
}

inline DnsName name_to_lower(const DnsName& n) {
  DnsName out;
  out.labels.reserve(n.labels.size());
  for (const auto& l : n.labels) out.labels.push_back(ascii_lower(l));
  return out;
}

/// True when `suffix` equals the trailing labels of `name` (case-insensitive).
inline bool name_ends_with(const DnsName& name, const DnsName& suffix) {
  if (suffix.labels.size() > name.labels.size()) return false;
  DnsName tail;
  tail.labels.assign(name.labels.end() - suffix.labels.size(), name.labels.end());
  return names_equal_ci(tail, suffix);
}

inline std::size_t name_wire_length(const DnsName& n) {
  std::size_t len = 1;  // terminal zero octet
  for (const auto& l : n.labels) len += 1 + l.size();
  return len;
}

inline void validate_name(const DnsName& n) {
  for (const auto& l : n.labels) {
    if (l.empty()) throw WireError(WireErrc::empty_label, "zero-length label");
    if (l.size() > kMaxLabelLen)
      throw WireError(WireErrc::label_too_long, "label exceeds 63 octets");
  }
  if (name_wire_length(n) > kMaxNameWireLen)
    throw WireError(WireErrc::name_too_long, "name exceeds 255 octets");
}

/// Uncompressed wire encoding. Compression pointers are never emitted.
inline void encode_name(ByteWriter& w, const DnsName& n) {
  validate_name(n);
  for (const auto& l : n.labels) {
    w.u8(static_cast<std::uint8_t>(l.size()));
    w.bytes(l);
  }
  w.u8(0);
}

inline std::vector<std::uint8_t> encode_name(const DnsName& n) {
  ByteWriter w;
  encode_name(w, n);
  return w.take();
}

struct DecodedName {
  DnsName name;
  std::size_t next_offset;  // first octet after the name at the original position
};

/// Pointer-aware strict decoder: accepts RFC1035 compression anywhere,
/// bounds-checks every hop, and keeps label bytes verbatim.
inline DecodedName decode_name_strict(std::span<const std::uint8_t> msg, std::size_t offset) {
  if (offset >= msg.size())
    throw WireError(WireErrc::offset_out_of_range, "name offset beyond buffer");
  DnsName name;
  std::size_t pos = offset;
  std::size_t next = 0;
  bool jumped = false;
  int hops = 0;
  std::size_t wire_len = 1;
  for (;;) {
    if (pos >= msg.size()) throw WireError(WireErrc::truncated_name, "name runs off buffer");
    std::uint8_t len = msg[pos];
    if ((len & 0xC0) == 0xC0) {
      if (pos + 1 >= msg.size())
        throw WireError(WireErrc::truncated_name, "pointer missing low octet");
      if (++hops > kMaxPointerHops)
        throw WireError(WireErrc::pointer_loop, "too many compression hops");
      std::size_t target = (static_cast<std::size_t>(len & 0x3F) << 8) | msg[pos + 1];
      if (!jumped) {
        next = pos + 2;
        jumped = true;
      }
      if (target >= msg.size())
        throw WireError(WireErrc::offset_out_of_range, "pointer target beyond buffer");
      pos = target;
      continue;
    }
    if ((len & 0xC0) != 0)
      throw WireError(WireErrc::malformed_record, "reserved label type");
    if (len == 0) {
      if (!jumped) next = pos + 1;
      break;
    }
    if (pos + 1 + len > msg.size())
      throw WireError(WireErrc::truncated_name, "label runs off buffer");
    wire_len += 1 + len;
    if (wire_len > kMaxNameWireLen)
      throw WireError(WireErrc::name_too_long, "decoded name exceeds 255 octets");
    name.labels.emplace_back(reinterpret_cast<const char*>(msg.data() + pos + 1), len);
    pos += 1 + len;
  }
  return {std::move(name), next};
}

/// The flattening every vulnerable firmware shares: labels joined with '.',
/// then the string cut at the first 0x00. No escaping, so a 0x2E inside a
/// label is indistinguishable from a separator.
inline std::string name_to_naive_string(const DnsName& n) {
  std::string out;
  for (std::size_t i = 0; i < n.labels.size(); ++i) {
    if (i) out.push_back('.');
    out += n.labels[i];
  }
  if (auto z = out.find('\0'); z != std::string::npos) out.resize(z);
  return out;
}

/// Labels joined with '.' and nothing else; reference point for divergence checks.
inline std::string name_join_raw(const DnsName& n) {
  std::string out;
  for (std::size_t i = 0; i < n.labels.size(); ++i) {
    if (i) out.push_back('.');
    out += n.labels[i];
  }
  return out;
}

/// Re-reads a naive string the way flattening firmware does: split on every dot.
inline DnsName name_from_naive_string(std::string_view s) {
  DnsName out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      out.labels.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline bool label_has_special_byte(std::string_view label) {
  return label.find('\0') != std::string_view::npos ||
         label.find('.') != std::string_view::npos;
}

inline bool name_has_special_bytes(const DnsName& n) {
  for (const auto& l : n.labels)
    if (label_has_special_byte(l)) return true;
  return false;
}

/// Escaped presentation form: '.' and '\' inside a label become "\." and
/// "\\", other non-printable bytes become "\DDD". Lossless inverse of
/// name_from_presentation. Root is ".".
inline std::string name_to_presentation(const DnsName& n) {
  if (n.is_root()) return ".";
  std::string out;
  for (const auto& l : n.labels) {
    for (unsigned char c : l) {
      if (c == '.' || c == '\\') {
        out.push_back('\\');
        out.push_back(static_cast<char>(c));
      } else if (c >= 0x21 && c <= 0x7E) {
        out.push_back(static_cast<char>(c));
      } else {
        out.push_back('\\');
        out.push_back(static_cast<char>('0' + c / 100));
        out.push_back(static_cast<char>('0' + (c / 10) % 10));
        out.push_back(static_cast<char>('0' + c % 10));
      }
    }
    out.push_back('.');
  }
  return out;
}

/// Parses presentation text. "\DDD" is a decimal byte, "\X" is a literal X
/// for non-digit X; a trailing dot (absolute form) is accepted and ignored.
inline DnsName name_from_presentation(std::string_view text) {
  DnsName out;
  if (text.empty()) throw WireError(WireErrc::empty_label, "empty name text");
  if (text == ".") return out;
  std::string label;
  bool label_open = false;  // distinguishes "" from an explicit empty label
  std::size_t i = 0;
  auto flush = [&](bool trailing) {
    if (!label_open) {
      if (trailing) return;  // absolute-form trailing dot
      throw WireError(WireErrc::empty_label, "empty label");
    }
    if (label.empty()) throw WireError(WireErrc::empty_label, "empty label");
    if (label.size() > kMaxLabelLen)
      throw WireError(WireErrc::label_too_long, "label exceeds 63 octets");
    out.labels.push_back(label);
    label.clear();
    label_open = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '.') {
      bool trailing = (i + 1 == text.size());
      flush(trailing);
      ++i;
      continue;
    }
    label_open = true;
    if (c == '\\') {
      if (i + 1 >= text.size()) throw WireError(WireErrc::bad_escape, "dangling backslash");
      char d = text[i + 1];
      if (d >= '0' && d <= '9') {
        if (i + 3 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 2])) ||
            !std::isdigit(static_cast<unsigned char>(text[i + 3])))
          throw WireError(WireErrc::bad_escape, "\\DDD needs three digits");
        int v = (d - '0') * 100 + (text[i + 2] - '0') * 10 + (text[i + 3] - '0');
        if (v > 255) throw WireError(WireErrc::bad_escape, "\\DDD exceeds 255");
        label.push_back(static_cast<char>(v));
        i += 4;
      } else {
        label.push_back(d);
        i += 2;
      }
      continue;
    }
    label.push_back(c);
    ++i;
  }
  flush(true);
  if (name_wire_length(out) > kMaxNameWireLen)
    throw WireError(WireErrc::name_too_long, "name exceeds 255 octets");
  return out;
}

/// Convenience literal-ish constructor for plain or escaped names.
inline DnsName name_of(std::string_view text) { return name_from_presentation(text); }

}  // namespace dnslab
