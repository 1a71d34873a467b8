#include <catch_amalgamated.hpp>

#include "dnslab/message.hpp"
#include "dnslab/rng.hpp"

using namespace dnslab;

namespace {

DnsName random_name(SeededRng& rng, bool hostile) {
  static const char cs[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
  DnsName n;
  std::size_t nlabels = rng.uniform(1, 4);
  for (std::size_t i = 0; i < nlabels; ++i) {
    std::string l;
    std::size_t len = rng.uniform(1, 12);
    for (std::size_t j = 0; j < len; ++j) {
      if (hostile)
        l.push_back(static_cast<char>(rng.uniform(0, 255)));
      else
        l.push_back(cs[rng.uniform(0, sizeof(cs) - 2)]);
    }
    n.labels.push_back(std::move(l));
  }
  return n;
}

ResourceRecord random_record(SeededRng& rng) {
  ResourceRecord rr;
  rr.name = random_name(rng, rng.uniform(0, 3) == 0);
  rr.cls = RrClass::IN;
  rr.ttl = rng.uniform(0, 86400);
  switch (rng.uniform(0, 6)) {
    case 0:
      rr.type = RrType::A;
      rr.rdata = ARdata{rng.uniform(0, 0xFFFFFFFF)};
      break;
    case 1: {
      rr.type = RrType::AAAA;
      AaaaRdata a;
      for (auto& b : a.addr) b = static_cast<std::uint8_t>(rng.uniform(0, 255));
      rr.rdata = a;
      break;
    }
    case 2:
      rr.type = RrType::CNAME;
      rr.rdata = NameRdata{random_name(rng, rng.uniform(0, 3) == 0)};
      break;
    case 3: {
      rr.type = RrType::SOA;
      SoaRdata s;
      s.mname = random_name(rng, false);
      s.rname = random_name(rng, false);
      s.serial = rng.uniform(0, 1u << 30);
      s.refresh = rng.uniform(0, 100000);
      s.retry = rng.uniform(0, 100000);
      s.expire = rng.uniform(0, 100000);
      s.minimum = rng.uniform(0, 3600);
      rr.rdata = s;
      break;
    }
    case 4: {
      rr.type = RrType::TXT;
      TxtRdata t;
      std::size_t k = rng.uniform(1, 3);
      for (std::size_t i = 0; i < k; ++i) {
        std::string s;
        std::size_t len = rng.uniform(0, 40);
        for (std::size_t j = 0; j < len; ++j)
          s.push_back(static_cast<char>(rng.uniform(0, 255)));
        t.strings.push_back(std::move(s));
      }
      rr.rdata = t;
      break;
    }
    case 5: {
      rr.type = RrType::VSTAMP;
      rr.rdata = VstampRdata{RrType::A, rng.uniform(0, 1) == 1, random_name(rng, false)};
      break;
    }
    default: {
      rr.type = static_cast<RrType>(200);
      OpaqueRdata o;
      std::size_t len = rng.uniform(0, 24);
      for (std::size_t j = 0; j < len; ++j)
        o.bytes.push_back(static_cast<std::uint8_t>(rng.uniform(0, 255)));
      rr.rdata = o;
      break;
    }
  }
  return rr;
}

DnsMessage random_message(SeededRng& rng) {
  DnsMessage m;
  m.txid = rng.txid();
  m.flags.qr = rng.uniform(0, 1);
  m.flags.aa = rng.uniform(0, 1);
  m.flags.rd = rng.uniform(0, 1);
  m.flags.ra = rng.uniform(0, 1);
  m.flags.cd = rng.uniform(0, 1);
  m.flags.ad = rng.uniform(0, 1);
  m.flags.rcode = static_cast<std::uint8_t>(rng.uniform(0, 5));
  std::size_t nq = rng.uniform(0, 2);
  for (std::size_t i = 0; i < nq; ++i)
    m.questions.push_back({random_name(rng, rng.uniform(0, 3) == 0),
                           rng.uniform(0, 1) ? RrType::A : RrType::CNAME, RrClass::IN});
  std::size_t an = rng.uniform(0, 3), ns = rng.uniform(0, 2), ar = rng.uniform(0, 2);
  for (std::size_t i = 0; i < an; ++i) m.answers.push_back(random_record(rng));
  for (std::size_t i = 0; i < ns; ++i) m.authority.push_back(random_record(rng));
  for (std::size_t i = 0; i < ar; ++i) m.additional.push_back(random_record(rng));
  return m;
}

}  // namespace

TEST_CASE("query serializes to the documented octets", "[message]") {
  DnsMessage q = make_query(0x1234, name_of("www.example.com"), RrType::A);
  auto wire = serialize_message(q);
  REQUIRE(wire.size() == 12 + 17 + 4);
  CHECK(wire[0] == 0x12);
  CHECK(wire[1] == 0x34);
  CHECK(wire[2] == 0x01);  // rd
  CHECK(wire[3] == 0x00);
  CHECK(wire[4] == 0x00);
  CHECK(wire[5] == 0x01);  // qdcount
  CHECK(wire[wire.size() - 4] == 0x00);
  CHECK(wire[wire.size() - 3] == 0x01);  // qtype A
  CHECK(wire[wire.size() - 2] == 0x00);
  CHECK(wire[wire.size() - 1] == 0x01);  // class IN
}

TEST_CASE("version.bind probe uses the CHAOS class", "[message]") {
  DnsMessage q = make_query(7, name_of("version.bind"), RrType::TXT, RrClass::CHAOS);
  auto wire = serialize_message(q);
  CHECK(wire[wire.size() - 2] == 0x00);
  CHECK(wire[wire.size() - 1] == 0x03);
  auto r = parse_message(wire);
  REQUIRE(r.ok());
  CHECK(r.message.questions.at(0).cls == RrClass::CHAOS);
}

TEST_CASE("response with every rdata type round-trips", "[message]") {
  DnsMessage m;
  m.txid = 99;
  m.flags.qr = true;
  m.flags.aa = true;
  m.questions.push_back({name_of("x.test.com"), RrType::A, RrClass::IN});
  m.answers.push_back({name_of("x.test.com"), RrType::CNAME, RrClass::IN, 60,
                       NameRdata{name_of("y.test.com")}});
  m.answers.push_back({name_of("y.test.com"), RrType::A, RrClass::IN, 60,
                       ARdata{*ipv4_from_string("6.6.6.6")}});
  m.authority.push_back({name_of("test.com"), RrType::SOA, RrClass::IN, 30,
                         SoaRdata{name_of("ns.test.com"), name_of("root.test.com"), 1, 2, 3, 4, 0}});
  m.additional.push_back({name_of("y.test.com"), RrType::TXT, RrClass::IN, 60,
                          TxtRdata{{"hello", std::string("\0raw", 4)}}});
  m.additional.push_back({name_of("y.test.com"), RrType::VSTAMP, RrClass::IN, 60,
                          VstampRdata{RrType::A, false, name_of("test.com")}});
  auto wire = serialize_message(m);
  auto r = parse_message(wire);
  REQUIRE(r.ok());
  CHECK(r.message == m);
}

TEST_CASE("parser accepts compression pointers in answers", "[message]") {
  // Hand-built response: question www.test.com, answer name is a pointer to it.
  ByteWriter w;
  w.u16(0xBEEF);
  w.u16(Flags{.qr = true}.to_word());
  w.u16(1);
  w.u16(1);
  w.u16(0);
  w.u16(0);
  std::size_t qname_at = w.size();
  encode_name(w, name_of("www.test.com"));
  w.u16(1);
  w.u16(1);
  w.u8(0xC0);
  w.u8(static_cast<std::uint8_t>(qname_at));
  w.u16(1);
  w.u16(1);
  w.u32(300);
  w.u16(4);
  w.u32(*ipv4_from_string("1.2.3.4"));
  auto r = parse_message(w.data());
  REQUIRE(r.ok());
  REQUIRE(r.message.answers.size() == 1);
  CHECK(r.message.answers[0].name == name_of("www.test.com"));
  CHECK(first_a_rdata(r.message) == ipv4_from_string("1.2.3.4"));
}

TEST_CASE("count overrunning the body reports truncated", "[message]") {
  DnsMessage q = make_query(1, name_of("a.b"), RrType::A);
  auto wire = serialize_message(q);
  wire[7] = 1;  // claim one answer, provide none
  auto r = parse_message(wire);
  CHECK(r.status == ParseStatus::truncated);
  CHECK(r.message.questions.size() == 1);  // partial message survives
}

TEST_CASE("short header reports truncated", "[message]") {
  std::vector<std::uint8_t> b = {1, 2, 3};
  CHECK(parse_message(b).status == ParseStatus::truncated);
}

TEST_CASE("broken rdata reports malformed_record and keeps earlier records", "[message]") {
  DnsMessage m;
  m.txid = 5;
  m.flags.qr = true;
  m.questions.push_back({name_of("q.test"), RrType::A, RrClass::IN});
  m.answers.push_back({name_of("ok.test"), RrType::A, RrClass::IN, 60, ARdata{0x01020304}});
  m.answers.push_back({name_of("bad.test"), RrType::A, RrClass::IN, 60, ARdata{0x05060708}});
  auto wire = serialize_message(m);
  // Shrink the second A record's rdlength to 3: frame intact, content broken.
  // Layout: ... second record = name(9) type(2) cls(2) ttl(4) rdlen(2) rdata(4).
  std::size_t second_rdlen_at = wire.size() - 4 - 2;
  wire[second_rdlen_at] = 0;
  wire[second_rdlen_at + 1] = 3;
  wire.resize(wire.size() - 1);
  auto r = parse_message(wire);
  CHECK(r.status == ParseStatus::malformed_record);
  REQUIRE(r.message.answers.size() == 1);
  CHECK(r.message.answers[0].name == name_of("ok.test"));
}

TEST_CASE("tcp framing wraps and unwraps", "[message]") {
  DnsMessage q = make_query(2, name_of("t.test"), RrType::A);
  auto wire = serialize_message(q);
  auto framed = frame_tcp(wire);
  REQUIRE(framed.size() == wire.size() + 2);
  CHECK(unframe_tcp(framed) == wire);
  CHECK(unframe_tcp(std::span<const std::uint8_t>(framed.data(), 1)).empty());
}

TEST_CASE("message round-trip on randomized messages", "[message][property]") {
  SeededRng rng(31337);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    DnsMessage m = random_message(rng);
    auto wire = serialize_message(m);
    auto r = parse_message(wire);
    REQUIRE(r.ok());
    if (!(r.message == m)) {
      CAPTURE(i);
      REQUIRE(r.message == m);
    }
    ++checked;
  }
  CHECK(checked == 20000);
}
