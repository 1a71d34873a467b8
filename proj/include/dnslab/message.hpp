#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dnslab/bytes.hpp"
#include "dnslab/name.hpp"

namespace dnslab {

enum class RrType : std::uint16_t {
  A = 1,
  NS = 2,
  CNAME = 5,
  SOA = 6,
  PTR = 12,
  TXT = 16,
  AAAA = 28,
  OPT = 41,
  VSTAMP = 46,  // abstract validity stamp standing in for a signature record
  ANY = 255,
};

enum class RrClass : std::uint16_t {
  IN = 1,
  CHAOS = 3,
  ANY = 255,
};

inline std::string rrtype_to_string(RrType t) {
  switch (t) {
    case RrType::A: return "A";
    case RrType::NS: return "NS";
    case RrType::CNAME: return "CNAME";
    case RrType::SOA: return "SOA";
    case RrType::PTR: return "PTR";
    case RrType::TXT: return "TXT";
    case RrType::AAAA: return "AAAA";
    case RrType::OPT: return "OPT";
    case RrType::VSTAMP: return "VSTAMP";
    case RrType::ANY: return "ANY";
  }
  return "TYPE" + std::to_string(static_cast<unsigned>(t));
}

inline std::optional<RrType> rrtype_from_string(const std::string& s) {
  if (s == "A") return RrType::A;
  if (s == "NS") return RrType::NS;
  if (s == "CNAME") return RrType::CNAME;
  if (s == "SOA") return RrType::SOA;
  if (s == "PTR") return RrType::PTR;
  if (s == "TXT") return RrType::TXT;
  if (s == "AAAA") return RrType::AAAA;
  if (s == "OPT") return RrType::OPT;
  if (s == "VSTAMP") return RrType::VSTAMP;
  if (s == "ANY") return RrType::ANY;
  return std::nullopt;
}

inline std::string rrclass_to_string(RrClass c) {
  switch (c) {
    case RrClass::IN: return "IN";
    case RrClass::CHAOS: return "CH";
    case RrClass::ANY: return "ANY";
  }
  return "CLASS" + std::to_string(static_cast<unsigned>(c));
}

constexpr std::uint8_t kRcodeNoError = 0;
constexpr std::uint8_t kRcodeFormErr = 1;
constexpr std::uint8_t kRcodeServFail = 2;
constexpr std::uint8_t kRcodeNxDomain = 3;
constexpr std::uint8_t kRcodeNotImp = 4;
constexpr std::uint8_t kRcodeRefused = 5;

struct Flags {
  bool qr = false;
  std::uint8_t opcode = 0;
  bool aa = false;
  bool tc = false;
  bool rd = false;
  bool ra = false;
  bool ad = false;
  bool cd = false;
  std::uint8_t rcode = 0;

  std::uint16_t to_word() const {
    std::uint16_t w = 0;
    if (qr) w |= 0x8000;
    w |= static_cast<std::uint16_t>((opcode & 0xF) << 11);
    if (aa) w |= 0x0400;
    if (tc) w |= 0x0200;
    if (rd) w |= 0x0100;
    if (ra) w |= 0x0080;
    if (ad) w |= 0x0020;
    if (cd) w |= 0x0010;
    w |= (rcode & 0xF);
    return w;
  }
  static Flags from_word(std::uint16_t w) {
    Flags f;
    f.qr = w & 0x8000;
    f.opcode = (w >> 11) & 0xF;
    f.aa = w & 0x0400;
    f.tc = w & 0x0200;
    f.rd = w & 0x0100;
    f.ra = w & 0x0080;
    f.ad = w & 0x0020;
    f.cd = w & 0x0010;
    f.rcode = w & 0xF;
    return f;
  }
  bool operator==(const Flags&) const = default;
};

struct Question {
  DnsName name;
  RrType type = RrType::A;
  RrClass cls = RrClass::IN;
  bool operator==(const Question&) const = default;
};

inline std::string ipv4_to_string(std::uint32_t a) {
  return std::to_string((a >> 24) & 0xFF) + "." + std::to_string((a >> 16) & 0xFF) + "." +
         std::to_string((a >> 8) & 0xFF) + "." + std::to_string(a & 0xFF);
}

inline std::optional<std::uint32_t> ipv4_from_string(std::string_view s) {
  std::uint32_t out = 0;
  int part = 0;
  long cur = -1;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      if (cur < 0 || cur > 255 || part >= 4) return std::nullopt;
      out = (out << 8) | static_cast<std::uint32_t>(cur);
      ++part;
      cur = -1;
      continue;
    }
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    cur = (cur < 0 ? 0 : cur) * 10 + (s[i] - '0');
    if (cur > 999) return std::nullopt;
  }
  if (part != 4) return std::nullopt;
  return out;
}

struct ARdata {
  std::uint32_t addr = 0;
  bool operator==(const ARdata&) const = default;
};
struct AaaaRdata {
  std::array<std::uint8_t, 16> addr{};
  bool operator==(const AaaaRdata&) const = default;
};
struct NameRdata {  // CNAME, NS, PTR
  DnsName target;
  bool operator==(const NameRdata&) const = default;
};
struct SoaRdata {
  DnsName mname;
  DnsName rname;
  std::uint32_t serial = 0;
  std::uint32_t refresh = 0;
  std::uint32_t retry = 0;
  std::uint32_t expire = 0;
  std::uint32_t minimum = 0;
  bool operator==(const SoaRdata&) const = default;
};
struct TxtRdata {
  std::vector<std::string> strings;
  bool operator==(const TxtRdata&) const = default;
};
/// Stand-in for a signature: carries only the covered type and a validity
/// bit. No cryptography anywhere; the bit is what validation checks.
struct VstampRdata {
  RrType covered = RrType::A;
  bool valid = true;
  DnsName signer;
  bool operator==(const VstampRdata&) const = default;
};
struct OpaqueRdata {
  std::vector<std::uint8_t> bytes;
  bool operator==(const OpaqueRdata&) const = default;
};

using Rdata = std::variant<ARdata, AaaaRdata, NameRdata, SoaRdata, TxtRdata, VstampRdata, OpaqueRdata>;

struct ResourceRecord {
  DnsName name;
  RrType type = RrType::A;
  RrClass cls = RrClass::IN;
  std::uint32_t ttl = 0;
  Rdata rdata = ARdata{};
  bool operator==(const ResourceRecord&) const = default;
};

struct DnsMessage {
  std::uint16_t txid = 0;
  Flags flags;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authority;
  std::vector<ResourceRecord> additional;
  bool operator==(const DnsMessage&) const = default;
};

namespace detail {

inline void encode_rdata(ByteWriter& w, const ResourceRecord& rr) {
  std::size_t len_at = w.size();
  w.u16(0);  // rdlength backpatched below
  std::size_t start = w.size();
  switch (rr.type) {
    case RrType::A: {
      const auto* a = std::get_if<ARdata>(&rr.rdata);
      if (!a) throw WireError(WireErrc::bad_rdata, "A record needs ARdata");
      w.u32(a->addr);
      break;
    }
    case RrType::AAAA: {
      const auto* a = std::get_if<AaaaRdata>(&rr.rdata);
      if (!a) throw WireError(WireErrc::bad_rdata, "AAAA record needs AaaaRdata");
      for (auto b : a->addr) w.u8(b);
      break;
    }
    case RrType::CNAME:
    case RrType::NS:
    case RrType::PTR: {
      const auto* n = std::get_if<NameRdata>(&rr.rdata);
      if (!n) throw WireError(WireErrc::bad_rdata, "name-typed record needs NameRdata");
      encode_name(w, n->target);
      break;
    }
    case RrType::SOA: {
      const auto* s = std::get_if<SoaRdata>(&rr.rdata);
      if (!s) throw WireError(WireErrc::bad_rdata, "SOA record needs SoaRdata");
      encode_name(w, s->mname);
      encode_name(w, s->rname);
      w.u32(s->serial);
      w.u32(s->refresh);
      w.u32(s->retry);
      w.u32(s->expire);
      w.u32(s->minimum);
      break;
    }
    case RrType::TXT: {
      const auto* t = std::get_if<TxtRdata>(&rr.rdata);
      if (!t) throw WireError(WireErrc::bad_rdata, "TXT record needs TxtRdata");
      for (const auto& s : t->strings) {
        if (s.size() > 255) throw WireError(WireErrc::bad_rdata, "TXT string exceeds 255");
        w.u8(static_cast<std::uint8_t>(s.size()));
        w.bytes(s);
      }
      break;
    }
    case RrType::VSTAMP: {
      const auto* v = std::get_if<VstampRdata>(&rr.rdata);
      if (!v) throw WireError(WireErrc::bad_rdata, "VSTAMP record needs VstampRdata");
      w.u16(static_cast<std::uint16_t>(v->covered));
      w.u8(v->valid ? 1 : 0);
      encode_name(w, v->signer);
      break;
    }
    default: {
      const auto* o = std::get_if<OpaqueRdata>(&rr.rdata);
      if (!o) throw WireError(WireErrc::bad_rdata, "unknown type needs OpaqueRdata");
      w.bytes(o->bytes);
      break;
    }
  }
  std::size_t n = w.size() - start;
  if (n > 0xFFFF) throw WireError(WireErrc::bad_rdata, "rdata exceeds 65535");
  w.patch_u16(len_at, static_cast<std::uint16_t>(n));
}

inline void encode_record(ByteWriter& w, const ResourceRecord& rr) {
  encode_name(w, rr.name);
  w.u16(static_cast<std::uint16_t>(rr.type));
  w.u16(static_cast<std::uint16_t>(rr.cls));
  w.u32(rr.ttl);
  encode_rdata(w, rr);
}

}  // namespace detail

/// Serializes without compression pointers; accepts them only on parse.
inline std::vector<std::uint8_t> serialize_message(const DnsMessage& m) {
  ByteWriter w;
  w.u16(m.txid);
  w.u16(m.flags.to_word());
  w.u16(static_cast<std::uint16_t>(m.questions.size()));
  w.u16(static_cast<std::uint16_t>(m.answers.size()));
  w.u16(static_cast<std::uint16_t>(m.authority.size()));
  w.u16(static_cast<std::uint16_t>(m.additional.size()));
  for (const auto& q : m.questions) {
    encode_name(w, q.name);
    w.u16(static_cast<std::uint16_t>(q.type));
    w.u16(static_cast<std::uint16_t>(q.cls));
  }
  for (const auto& rr : m.answers) detail::encode_record(w, rr);
  for (const auto& rr : m.authority) detail::encode_record(w, rr);
  for (const auto& rr : m.additional) detail::encode_record(w, rr);
  return w.take();
}

enum class ParseStatus {
  ok,
  truncated,         // header or a record frame ran off the buffer
  malformed_record,  // a record frame was present but its content is broken
};

inline const char* to_string(ParseStatus s) {
  switch (s) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::truncated: return "truncated";
    case ParseStatus::malformed_record: return "malformed_record";
  }
  return "unknown";
}

/// Soft parse result: `message` holds everything decoded before the first
/// defect so observers can still inspect broken responses.
struct ParseResult {
  DnsMessage message;
  ParseStatus status = ParseStatus::ok;
  std::string detail;

  bool ok() const { return status == ParseStatus::ok; }
};

namespace detail {

inline Rdata parse_rdata(std::span<const std::uint8_t> msg, RrType type, std::size_t at,
                         std::size_t rdlength) {
  std::span<const std::uint8_t> rd = msg.subspan(at, rdlength);
  switch (type) {
    case RrType::A: {
      if (rdlength != 4) throw WireError(WireErrc::malformed_record, "A rdlength != 4");
      ByteReader r(rd);
      return ARdata{r.u32()};
    }
    case RrType::AAAA: {
      if (rdlength != 16) throw WireError(WireErrc::malformed_record, "AAAA rdlength != 16");
      AaaaRdata a;
      for (std::size_t i = 0; i < 16; ++i) a.addr[i] = rd[i];
      return a;
    }
    case RrType::CNAME:
    case RrType::NS:
    case RrType::PTR: {
      // Decoded against the whole message so compressed targets resolve.
      auto dn = decode_name_strict(msg, at);
      return NameRdata{std::move(dn.name)};
    }
    case RrType::SOA: {
      auto mn = decode_name_strict(msg, at);
      auto rn = decode_name_strict(msg, mn.next_offset);
      if (rn.next_offset + 20 > msg.size())
        throw WireError(WireErrc::malformed_record, "SOA fixed fields run off buffer");
      ByteReader r(msg, rn.next_offset);
      SoaRdata s;
      s.mname = std::move(mn.name);
      s.rname = std::move(rn.name);
      s.serial = r.u32();
      s.refresh = r.u32();
      s.retry = r.u32();
      s.expire = r.u32();
      s.minimum = r.u32();
      return s;
    }
    case RrType::TXT: {
      TxtRdata t;
      std::size_t p = 0;
      while (p < rdlength) {
        std::size_t n = rd[p];
        if (p + 1 + n > rdlength)
          throw WireError(WireErrc::malformed_record, "TXT string runs off rdata");
        t.strings.emplace_back(reinterpret_cast<const char*>(rd.data() + p + 1), n);
        p += 1 + n;
      }
      return t;
    }
    case RrType::VSTAMP: {
      if (rdlength < 3) throw WireError(WireErrc::malformed_record, "VSTAMP rdata too short");
      ByteReader r(rd);
      VstampRdata v;
      v.covered = static_cast<RrType>(r.u16());
      v.valid = r.u8() != 0;
      auto sn = decode_name_strict(msg, at + 3);
      v.signer = std::move(sn.name);
      return v;
    }
    default:
      return OpaqueRdata{std::vector<std::uint8_t>(rd.begin(), rd.end())};
  }
}

}  // namespace detail

/// Parses a wire message. Never throws: defects degrade to a partial message
/// with a non-ok status so callers can observe broken responses.
inline ParseResult parse_message(std::span<const std::uint8_t> buf) {
  ParseResult out;
  if (buf.size() < 12) {
    out.status = ParseStatus::truncated;
    out.detail = "header shorter than 12 octets";
    return out;
  }
  ByteReader r(buf);
  out.message.txid = r.u16();
  out.message.flags = Flags::from_word(r.u16());
  std::uint16_t qd = r.u16();
  std::uint16_t an = r.u16();
  std::uint16_t ns = r.u16();
  std::uint16_t ar = r.u16();

  std::size_t pos = 12;
  try {
    for (std::uint16_t i = 0; i < qd; ++i) {
      auto dn = decode_name_strict(buf, pos);
      ByteReader fr(buf, dn.next_offset);
      Question q;
      q.name = std::move(dn.name);
      q.type = static_cast<RrType>(fr.u16());
      q.cls = static_cast<RrClass>(fr.u16());
      pos = fr.pos();
      out.message.questions.push_back(std::move(q));
    }
  } catch (const WireError& e) {
    out.status = ParseStatus::truncated;
    out.detail = std::string("question section: ") + e.what();
    return out;
  }

  auto parse_section = [&](std::uint16_t count, std::vector<ResourceRecord>& into) -> bool {
    for (std::uint16_t i = 0; i < count; ++i) {
      std::size_t frame_start = pos;
      DecodedName dn;
      std::uint16_t rdlength;
      ResourceRecord rr;
      try {
        dn = decode_name_strict(buf, pos);
        ByteReader fr(buf, dn.next_offset);
        rr.name = std::move(dn.name);
        rr.type = static_cast<RrType>(fr.u16());
        rr.cls = static_cast<RrClass>(fr.u16());
        rr.ttl = fr.u32();
        rdlength = fr.u16();
        if (fr.pos() + rdlength > buf.size())
          throw WireError(WireErrc::truncated, "rdata runs off buffer");
        pos = fr.pos() + rdlength;
        try {
          rr.rdata = detail::parse_rdata(buf, rr.type, fr.pos(), rdlength);
        } catch (const WireError& e) {
          // Frame was intact, content was not: report as a malformed record.
          throw WireError(WireErrc::malformed_record, e.what());
        }
      } catch (const WireError& e) {
        bool frame_ok = e.code() == WireErrc::malformed_record;
        out.status = frame_ok ? ParseStatus::malformed_record : ParseStatus::truncated;
        out.detail = "record at offset " + std::to_string(frame_start) + ": " + e.what();
        return false;
      }
      into.push_back(std::move(rr));
    }
    return true;
  };

  if (!parse_section(an, out.message.answers)) return out;
  if (!parse_section(ns, out.message.authority)) return out;
  if (!parse_section(ar, out.message.additional)) return out;
  return out;
}

/// Parse that insists on a clean message.
inline DnsMessage parse_message_strict(std::span<const std::uint8_t> buf) {
  ParseResult r = parse_message(buf);
  if (!r.ok())
    throw WireError(r.status == ParseStatus::truncated ? WireErrc::truncated
                                                       : WireErrc::malformed_record,
                    r.detail);
  return std::move(r.message);
}

inline DnsMessage make_query(std::uint16_t txid, const DnsName& name, RrType type,
                             RrClass cls = RrClass::IN, bool rd = true, bool cd = false) {
  DnsMessage m;
  m.txid = txid;
  m.flags.rd = rd;
  m.flags.cd = cd;
  m.questions.push_back({name, type, cls});
  return m;
}

inline std::optional<std::uint32_t> first_a_rdata(const DnsMessage& m) {
  for (const auto& rr : m.answers)
    if (rr.type == RrType::A)
      if (const auto* a = std::get_if<ARdata>(&rr.rdata)) return a->addr;
  return std::nullopt;
}

inline std::optional<DnsName> last_cname_target(const DnsMessage& m, const DnsName& from) {
  // Follows owner->target links case-insensitively, starting at `from`.
  DnsName cur = from;
  bool advanced = true;
  int guard = 0;
  while (advanced && ++guard < 32) {
    advanced = false;
    for (const auto& rr : m.answers) {
      if (rr.type != RrType::CNAME) continue;
      if (!names_equal_ci(rr.name, cur)) continue;
      if (const auto* n = std::get_if<NameRdata>(&rr.rdata)) {
        cur = n->target;
        advanced = true;
        break;
      }
    }
  }
  if (cur == from) return std::nullopt;
  return cur;
}

/// One-line rendering used by transcripts and reports.
inline std::string summarize(const DnsMessage& m) {
  std::string s = m.flags.qr ? "resp" : "query";
  s += " txid=" + std::to_string(m.txid);
  if (m.flags.qr) s += " rcode=" + std::to_string(m.flags.rcode);
  if (m.flags.aa) s += " aa";
  if (m.flags.cd) s += " cd";
  for (const auto& q : m.questions)
    s += " q=" + name_to_presentation(q.name) + "/" + rrtype_to_string(q.type);
  for (const auto& rr : m.answers) {
    s += " an=" + name_to_presentation(rr.name) + "/" + rrtype_to_string(rr.type);
    if (const auto* a = std::get_if<ARdata>(&rr.rdata)) s += "=" + ipv4_to_string(a->addr);
    if (const auto* n = std::get_if<NameRdata>(&rr.rdata))
      s += "=" + name_to_presentation(n->target);
  }
  if (!m.authority.empty()) s += " ns#" + std::to_string(m.authority.size());
  return s;
}

}  // namespace dnslab
