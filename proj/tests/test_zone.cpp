#include <catch_amalgamated.hpp>

#include "dnslab/zone.hpp"
#include "dnslab/zoneset.hpp"

using namespace dnslab;

namespace {

DnsName raw_name(std::vector<std::string> labels) {
  DnsName n;
  n.labels = std::move(labels);
  return n;
}

DnsMessage ask(AttackerNameserver& ns, const DnsName& name, RrType type = RrType::A) {
  return ns.handle_query(make_query(1, name, type));
}

}  // namespace

TEST_CASE("owner patterns match exactly or capture one wildcard label") {
  DnsName pattern = name_of("*.probe.test.com");
  auto m = match_owner(pattern, name_of("abc123.probe.test.com"));
  REQUIRE(m.has_value());
  CHECK(*m == "abc123");
  CHECK_FALSE(match_owner(pattern, name_of("probe.test.com")).has_value());
  CHECK_FALSE(match_owner(pattern, name_of("a.b.probe.test.com")).has_value());
  CHECK(match_owner(name_of("x.test.com"), name_of("X.TEST.com")).has_value());

  // Interior wildcard: the slot between a special prefix and the zone suffix.
  DnsName inner = raw_name({"www", "victim", std::string("com") + '\0', "*", "test", "com"});
  DnsName concrete = raw_name({"www", "victim", std::string("com") + '\0', "r4nd0m", "test",
                               "com"});
  auto m2 = match_owner(inner, concrete);
  REQUIRE(m2.has_value());
  CHECK(*m2 == "r4nd0m");
  CHECK(substitute_star(inner, "r4nd0m") == concrete);
}

TEST_CASE("randomized probe names keep the base and stay within limits") {
  SeededRng rng(5);
  DnsName base = name_of("probe.test.com");
  DnsName p1 = randomized_probe_name(base, rng);
  DnsName p2 = randomized_probe_name(base, rng);
  REQUIRE(p1.labels.size() == 4);
  CHECK(p1.labels[0].size() == 12);
  CHECK(p1.labels[0] != p2.labels[0]);
  CHECK(name_ends_with(p1, base));
}

TEST_CASE("a scripted zone serves steps by arrival count per concrete name") {
  ZoneScript z;
  z.apex = name_of("sched.example");
  {
    ScriptEntry e;
    e.owner = name_of("flip.sched.example");
    e.rrtype = RrType::A;
    AnswerStep first;
    first.forever = false;
    first.soa_minimum = 0;
    AnswerStep rest;
    rest.answers.push_back({ResourceRecord{e.owner, RrType::A, RrClass::IN, 60,
                                           ARdata{0x06060606}},
                            true});
    e.schedule = {first, rest};
    z.entries.push_back(e);
  }
  AttackerNameserver ns;
  ns.add_zone(z);

  DnsName q = name_of("flip.sched.example");
  DnsMessage first = ask(ns, q);
  CHECK(first.answers.empty());
  REQUIRE(first.authority.size() == 1);
  CHECK(first.authority[0].type == RrType::SOA);
  CHECK(std::get<SoaRdata>(first.authority[0].rdata).minimum == 0);

  DnsMessage second = ask(ns, q);
  REQUIRE(second.answers.size() == 1);
  CHECK(first_a_rdata(second) == 0x06060606);
  DnsMessage third = ask(ns, q);  // the last step repeats forever
  CHECK(first_a_rdata(third) == 0x06060606);

  // A different record type has its own counter.
  DnsMessage txt = ask(ns, q, RrType::TXT);
  CHECK(txt.answers.empty());
}

TEST_CASE("wildcard captures do not share schedule positions") {
  ZoneScript z;
  z.apex = name_of("wild.example");
  ScriptEntry e;
  e.owner = name_of("*.wild.example");
  e.rrtype = RrType::A;
  AnswerStep first;
  first.forever = false;
  first.soa_minimum = 0;
  AnswerStep rest;
  rest.answers.push_back({ResourceRecord{e.owner, RrType::A, RrClass::IN, 60,
                                         ARdata{0x01020304}},
                          true});
  e.schedule = {first, rest};
  z.entries.push_back(e);
  AttackerNameserver ns;
  ns.add_zone(z);

  CHECK(ask(ns, name_of("aa.wild.example")).answers.empty());  // aa's first arrival
  CHECK(ask(ns, name_of("bb.wild.example")).answers.empty());  // bb's own first arrival
  DnsMessage aa2 = ask(ns, name_of("aa.wild.example"));
  REQUIRE(aa2.answers.size() == 1);
  CHECK(aa2.answers[0].name == name_of("aa.wild.example"));  // owner concretized
}

TEST_CASE("wildcard capture substitutes into alias targets") {
  LabNames names;
  AttackerNameserver ns;
  for (auto& z : builtin_scan_zones(names)) ns.add_zone(std::move(z));

  DnsName trigger = name_of("xyzzy.czero.test.com");
  DnsMessage resp = ask(ns, trigger);
  REQUIRE(resp.answers.size() == 1);
  REQUIRE(resp.answers[0].type == RrType::CNAME);
  DnsName target = std::get<NameRdata>(resp.answers[0].rdata).target;
  // The alias target embeds the captured label, so every probe is unique,
  // while its flattened form is always the victim name.
  CHECK(target ==
        raw_name({"c0", "target", std::string("com") + '\0', "xyzzy", "test", "com"}));
  CHECK(name_to_naive_string(target) == "c0.target.com");

  DnsMessage addr = ask(ns, target);
  REQUIRE(addr.answers.size() == 1);
  CHECK(first_a_rdata(addr) == kPayloadAddr);
}

TEST_CASE("queries outside every zone are refused; unmatched names get nxdomain") {
  AttackerNameserver ns;
  for (auto& z : builtin_scan_zones()) ns.add_zone(std::move(z));

  CHECK(ask(ns, name_of("www.elsewhere.org")).flags.rcode == kRcodeRefused);

  DnsMessage nx = ask(ns, name_of("nothing.here.test.com"));
  CHECK(nx.flags.rcode == kRcodeNxDomain);
  REQUIRE(nx.authority.size() == 1);
  CHECK(nx.authority[0].type == RrType::SOA);
  CHECK(nx.flags.aa == true);
}

TEST_CASE("deeper apexes shadow enclosing zones") {
  AttackerNameserver ns;
  for (auto& z : builtin_scan_zones()) ns.add_zone(std::move(z));
  const ZoneScript* z = ns.find_zone(name_of("x.bad.sec.test.com"));
  REQUIRE(z != nullptr);
  CHECK(z->apex == name_of("sec.test.com"));
  CHECK(z->sign == true);
}

TEST_CASE("signed zones stamp every answer; invalid entries carry a false stamp") {
  AttackerNameserver ns;
  for (auto& z : builtin_scan_zones()) ns.add_zone(std::move(z));

  DnsMessage resp = ask(ns, name_of("zz.bad.sec.test.com"));
  REQUIRE(resp.answers.size() == 2);
  CHECK(resp.answers[0].type == RrType::A);
  REQUIRE(resp.answers[1].type == RrType::VSTAMP);
  const auto& stamp = std::get<VstampRdata>(resp.answers[1].rdata);
  CHECK(stamp.covered == RrType::A);
  CHECK(stamp.valid == false);
  CHECK(stamp.signer == name_of("sec.test.com"));

  // Unsigned zones carry no stamps.
  DnsMessage plain = ask(ns, name_of("qq.probe.test.com"));
  REQUIRE(plain.answers.size() == 1);
  CHECK(plain.answers[0].type == RrType::A);
}

TEST_CASE("the payload zone set mirrors the four classic injections") {
  LabNames n;
  AttackerNameserver ns;
  for (auto& z : builtin_payload_zones(n)) ns.add_zone(std::move(z));

  // zero.test.com -> alias whose flattened target is www.target.com
  DnsMessage zero = ask(ns, name_of("zero.test.com"));
  REQUIRE(zero.answers.size() == 1);
  DnsName zt = std::get<NameRdata>(zero.answers[0].rdata).target;
  CHECK(name_to_naive_string(zt) == "www.target.com");
  CHECK(first_a_rdata(ask(ns, zt)) == kPayloadAddr);

  // dot.test.com -> two-label alias that flattens to www.target.com
  DnsMessage dot = ask(ns, name_of("dot.test.com"));
  REQUIRE(dot.answers.size() == 1);
  DnsName dt = std::get<NameRdata>(dot.answers[0].rdata).target;
  REQUIRE(dt.labels.size() == 2);
  CHECK(dt.labels[0] == "www.target");
  CHECK(name_to_naive_string(dt) == "www.target.com");
  CHECK(first_a_rdata(ask(ns, dt)) == kPayloadAddr);

  // The legitimate record is untouched.
  CHECK(first_a_rdata(ask(ns, n.upstream_baseline)) == kVictimAddr);
}

TEST_CASE("zone scripts round-trip through their text form") {
  LabNames n;
  for (const auto& zone : builtin_scan_zones(n)) {
    std::string text = zone_to_text(zone);
    ZoneScript back = load_zone_script(text);
    CHECK(zone_to_text(back) == text);
    CHECK(back.apex == zone.apex);
    CHECK(back.sign == zone.sign);
    CHECK(back.entries.size() == zone.entries.size());
  }
  for (const auto& zone : builtin_chase_zones(false, n)) {
    std::string text = zone_to_text(zone);
    CHECK(zone_to_text(load_zone_script(text)) == text);
  }
}

TEST_CASE("zone text errors carry line numbers") {
  CHECK_THROWS_AS(load_zone_script("x 60 IN A 1.2.3.4\n"), ZoneParseError);  // before $ORIGIN
  try {
    load_zone_script("$ORIGIN z.example.\nx 60 IN A not-an-ip\n");
    FAIL("expected a parse error");
  } catch (const ZoneParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_zone_script("$ORIGIN z.example.\nx 60 XX A 1.2.3.4\n"), ZoneParseError);
  CHECK_THROWS_AS(load_zone_script("$ORIGIN z.example.\nx 60 IN WHAT 1.2.3.4\n"),
                  ZoneParseError);
  CHECK_THROWS_AS(load_zone_script("$ORIGIN z.example.\nx 60 IN A 1.2.3.4 [step=0 once\n"),
                  ZoneParseError);
}

TEST_CASE("zone text supports schedules, placeholders, and escapes") {
  ZoneScript z = load_zone_script(
      "$ORIGIN test.com.\n"
      "$SIGN off\n"
      "; the first arrival gets nothing, later ones get the address\n"
      "www.victim.com\\000.test.com. 60 IN A - [step=0 once soa-min=0]\n"
      "www.victim.com\\000.test.com. 60 IN A 6.6.6.6 [step=1 forever]\n"
      "zero 60 IN CNAME www.victim.com\\000.test.com.\n");
  CHECK(z.apex == name_of("test.com"));
  REQUIRE(z.entries.size() == 2);

  AttackerNameserver ns;
  ns.add_zone(z);
  DnsName special = raw_name({"www", "victim", std::string("com") + '\0', "test", "com"});
  DnsMessage trig = ask(ns, name_of("zero.test.com"));
  REQUIRE(trig.answers.size() == 1);
  CHECK(std::get<NameRdata>(trig.answers[0].rdata).target == special);

  CHECK(ask(ns, special).answers.empty());
  CHECK(first_a_rdata(ask(ns, special)) == 0x06060606);
}

TEST_CASE("zone text parses quoted txt and soa rdata") {
  ZoneScript z = load_zone_script(
      "$ORIGIN ver.example.\n"
      "banner 0 IN TXT \"release 1.2\" \"build 9\"\n"
      "@ 300 IN SOA ns.ver.example. host.ver.example. 7 3600 600 86400 30\n");
  REQUIRE(z.entries.size() == 2);
  const auto& txt = std::get<TxtRdata>(z.entries[0].schedule[0].answers[0].record.rdata);
  REQUIRE(txt.strings.size() == 2);
  CHECK(txt.strings[0] == "release 1.2");
  const auto& soa = std::get<SoaRdata>(z.entries[1].schedule[0].answers[0].record.rdata);
  CHECK(soa.serial == 7);
  CHECK(soa.minimum == 30);
}
