#include <catch_amalgamated.hpp>

#include "dnslab/name.hpp"
#include "dnslab/rng.hpp"

using namespace dnslab;

namespace {

DnsName raw_name(std::vector<std::string> labels) {
  DnsName n;
  n.labels = std::move(labels);
  return n;
}

DnsName random_plain_name(SeededRng& rng) {
  static const char cs[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
  DnsName n;
  std::size_t nlabels = rng.uniform(1, 5);
  for (std::size_t i = 0; i < nlabels; ++i) {
    std::string l;
    std::size_t len = rng.uniform(1, 12);
    for (std::size_t j = 0; j < len; ++j) l.push_back(cs[rng.uniform(0, sizeof(cs) - 2)]);
    n.labels.push_back(std::move(l));
  }
  return n;
}

// Arbitrary bytes, including 0x00, 0x2E, '\\', and high bytes.
DnsName random_hostile_name(SeededRng& rng) {
  DnsName n;
  std::size_t nlabels = rng.uniform(1, 5);
  for (std::size_t i = 0; i < nlabels; ++i) {
    std::string l;
    std::size_t len = rng.uniform(1, 20);
    for (std::size_t j = 0; j < len; ++j)
      l.push_back(static_cast<char>(rng.uniform(0, 255)));
    n.labels.push_back(std::move(l));
  }
  return n;
}

}  // namespace

TEST_CASE("encode/decode round-trips plain names", "[name]") {
  DnsName n = name_of("www.example.com");
  REQUIRE(n.labels == std::vector<std::string>{"www", "example", "com"});
  auto wire = encode_name(n);
  REQUIRE(wire.size() == 1 + 3 + 1 + 7 + 1 + 3 + 1);
  auto dec = decode_name_strict(wire, 0);
  CHECK(dec.name == n);
  CHECK(dec.next_offset == wire.size());
}

TEST_CASE("root name encodes to a single zero octet", "[name]") {
  DnsName root;
  auto wire = encode_name(root);
  REQUIRE(wire == std::vector<std::uint8_t>{0});
  CHECK(name_to_presentation(root) == ".");
  CHECK(name_from_presentation(".") == root);
}

TEST_CASE("labels keep raw bytes through the wire", "[name]") {
  DnsName n = raw_name({"www", "victim", std::string("com\0", 4), "attacker", "com"});
  auto wire = encode_name(n);
  auto dec = decode_name_strict(wire, 0);
  CHECK(dec.name == n);
  DnsName dotted = raw_name({"www.victim", "com"});
  auto wire2 = encode_name(dotted);
  CHECK(decode_name_strict(wire2, 0).name == dotted);
}

TEST_CASE("encode rejects oversized labels and names", "[name]") {
  DnsName big = raw_name({std::string(64, 'a')});
  CHECK_THROWS_MATCHES(encode_name(big), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::label_too_long;
                       }));
  DnsName huge;
  for (int i = 0; i < 5; ++i) huge.labels.push_back(std::string(63, 'a'));
  CHECK_THROWS_MATCHES(encode_name(huge), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::name_too_long;
                       }));
}

TEST_CASE("decoder follows compression pointers", "[name]") {
  // "example.com" at offset 2, "www" + pointer at offset 15.
  std::vector<std::uint8_t> buf;
  buf.push_back(0xAA);
  buf.push_back(0xBB);
  for (std::uint8_t b : encode_name(name_of("example.com"))) buf.push_back(b);
  std::size_t second = buf.size();
  buf.push_back(3);
  buf.push_back('w');
  buf.push_back('w');
  buf.push_back('w');
  buf.push_back(0xC0);
  buf.push_back(0x02);
  auto dec = decode_name_strict(buf, second);
  CHECK(dec.name == name_of("www.example.com"));
  CHECK(dec.next_offset == buf.size());
}

TEST_CASE("decoder rejects pointer loops", "[name]") {
  std::vector<std::uint8_t> buf = {0xC0, 0x02, 0xC0, 0x00};
  CHECK_THROWS_MATCHES(decode_name_strict(buf, 0), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::pointer_loop;
                       }));
}

TEST_CASE("decoder rejects truncation and bad offsets", "[name]") {
  std::vector<std::uint8_t> cut = {5, 'a', 'b'};
  CHECK_THROWS_MATCHES(decode_name_strict(cut, 0), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::truncated_name;
                       }));
  std::vector<std::uint8_t> ok = encode_name(name_of("a.b"));
  CHECK_THROWS_MATCHES(decode_name_strict(ok, ok.size()), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::offset_out_of_range;
                       }));
  std::vector<std::uint8_t> farptr = {0xC0, 0x30};
  CHECK_THROWS_MATCHES(decode_name_strict(farptr, 0), WireError,
                       Catch::Matchers::Predicate<WireError>([](const WireError& e) {
                         return e.code() == WireErrc::offset_out_of_range;
                       }));
}

TEST_CASE("naive flattening truncates at the first zero byte", "[name]") {
  DnsName evil = raw_name({"www", "victim", std::string("com\0", 4), "attacker", "com"});
  CHECK(name_to_naive_string(evil) == "www.victim.com");
  DnsName clean = name_of("www.example.com");
  CHECK(name_to_naive_string(clean) == "www.example.com");
  DnsName leading = raw_name({std::string("\0x", 2), "com"});
  CHECK(name_to_naive_string(leading) == "");
}

TEST_CASE("naive flattening cannot tell an embedded dot from a separator", "[name]") {
  DnsName evil = raw_name({"www.victim", "com"});
  CHECK(name_to_naive_string(evil) == "www.victim.com");
  CHECK(name_to_naive_string(name_of("www.victim.com")) == "www.victim.com");
}

TEST_CASE("presentation escapes dots, backslashes, and non-printables", "[name]") {
  DnsName dotted = raw_name({"www.victim", "com"});
  CHECK(name_to_presentation(dotted) == "www\\.victim.com.");
  CHECK(name_from_presentation("www\\.victim.com.") == dotted);

  DnsName zeroed = raw_name({"www", "victim", std::string("com\0", 4), "x"});
  CHECK(name_to_presentation(zeroed) == "www.victim.com\\000.x.");
  CHECK(name_from_presentation("www.victim.com\\000.x.") == zeroed);

  DnsName slashed = raw_name({"a\\b"});
  CHECK(name_to_presentation(slashed) == "a\\\\b.");
  CHECK(name_from_presentation("a\\\\b.") == slashed);
}

TEST_CASE("presentation parser rejects bad escapes and empty labels", "[name]") {
  auto code_is = [](WireErrc c) {
    return Catch::Matchers::Predicate<WireError>(
        [c](const WireError& e) { return e.code() == c; });
  };
  CHECK_THROWS_MATCHES(name_from_presentation("a\\"), WireError, code_is(WireErrc::bad_escape));
  CHECK_THROWS_MATCHES(name_from_presentation("a\\01x.b"), WireError,
                       code_is(WireErrc::bad_escape));
  CHECK_THROWS_MATCHES(name_from_presentation("a\\999.b"), WireError,
                       code_is(WireErrc::bad_escape));
  CHECK_THROWS_MATCHES(name_from_presentation("a..b"), WireError, code_is(WireErrc::empty_label));
  CHECK_THROWS_MATCHES(name_from_presentation(".a"), WireError, code_is(WireErrc::empty_label));
}

TEST_CASE("trailing dot is optional on parse, always emitted", "[name]") {
  CHECK(name_from_presentation("a.b") == name_from_presentation("a.b."));
  CHECK(name_to_presentation(name_of("a.b")) == "a.b.");
}

TEST_CASE("case-insensitive comparison is ASCII-only", "[name]") {
  CHECK(names_equal_ci(name_of("WWW.Example.COM"), name_of("www.example.com")));
  DnsName a = raw_name({std::string("\xC3\xA9", 2)});
  DnsName b = raw_name({std::string("\xC3\x89", 2)});
  CHECK_FALSE(names_equal_ci(a, b));
  CHECK_FALSE(names_equal_ci(name_of("a.b"), name_of("a.b.c")));
}

TEST_CASE("presentation round-trip on hostile names", "[name][property]") {
  SeededRng rng(20260817);
  for (int i = 0; i < 20000; ++i) {
    DnsName n = random_hostile_name(rng);
    CHECK(name_from_presentation(name_to_presentation(n)) == n);
  }
}

TEST_CASE("wire round-trip on hostile names", "[name][property]") {
  SeededRng rng(777);
  for (int i = 0; i < 20000; ++i) {
    DnsName n = random_hostile_name(rng);
    auto wire = encode_name(n);
    auto dec = decode_name_strict(wire, 0);
    CHECK(dec.name == n);
    CHECK(dec.next_offset == wire.size());
  }
}

TEST_CASE("naive channel diverges exactly on zero bytes and embedded dots", "[name][property]") {
  SeededRng rng(424242);
  int divergent = 0;
  for (int i = 0; i < 20000; ++i) {
    DnsName n = (i % 2) ? random_hostile_name(rng) : random_plain_name(rng);
    bool special = name_has_special_bytes(n);
    // The naive string loses information iff a label holds 0x00 or 0x2E:
    // re-splitting it yields the original name only in the clean case.
    DnsName back = name_from_naive_string(name_to_naive_string(n));
    REQUIRE((back != n) == special);
    // Truncation (vs. plain joining) happens iff a label holds 0x00.
    bool zero = false;
    for (const auto& l : n.labels) zero |= l.find('\0') != std::string::npos;
    REQUIRE((name_to_naive_string(n) != name_join_raw(n)) == zero);
    divergent += special;
  }
  CHECK(divergent > 1000);  // generator actually exercises the hostile path
}
