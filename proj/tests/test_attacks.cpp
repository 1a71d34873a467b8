#include <catch_amalgamated.hpp>

#include "dnslab/attacks.hpp"

using namespace dnslab;

namespace {

const Endpoint kA = *Endpoint::parse("10.0.0.1:1000");
const Endpoint kB = *Endpoint::parse("10.0.0.2:2000");

struct Sink : SimNode {
  std::vector<std::pair<SimTime, std::string>> got;
  void on_packet(SimNetwork&, SimTime now, const SimPacket& p) override {
    got.push_back({now, std::string(p.bytes.begin(), p.bytes.end())});
  }
  void on_timer(SimNetwork&, SimTime now, std::uint64_t id) override {
    got.push_back({now, "timer" + std::to_string(id)});
  }
};

}  // namespace

TEST_CASE("event network delivers by time, fires timers, drops unroutable sends") {
  SimNetwork net;  // 1000us link latency
  Sink sink;
  net.bind(kA, &sink);

  net.send_after(500, kB, kA, Transport::udp, {'x'});  // arrives t=1500
  net.send(kB, kA, Transport::udp, {'y'});             // arrives t=1000
  net.schedule(&sink, 1200, 7);                        // fires t=1200
  net.send(kA, kB, Transport::udp, {'z'});             // kB unbound: dropped at send

  auto r = net.run();
  REQUIRE(r.quiescent);
  CHECK(net.dropped_unroutable() == 1);
  REQUIRE(sink.got.size() == 3);
  CHECK(sink.got[0].first == 1000);
  CHECK(sink.got[0].second == "y");
  CHECK(sink.got[1].first == 1200);
  CHECK(sink.got[1].second == "timer7");
  CHECK(sink.got[2].first == 1500);
  CHECK(sink.got[2].second == "x");
  CHECK(net.now() == 1500);
}

TEST_CASE("event network allows spoofed sources but refuses double binds") {
  SimNetwork net;
  Sink sink, other;
  net.bind(kA, &sink);
  CHECK_THROWS(net.bind(kA, &other));
  net.bind(kA, &sink);  // same node again is fine

  // A packet claiming to come from an address nobody bound still arrives:
  // source addresses are attacker-controlled by design.
  net.send(*Endpoint::parse("203.0.113.66:4444"), kA, Transport::udp, {'s'});
  net.run();
  REQUIRE(sink.got.size() == 1);
  CHECK(sink.got[0].second == "s");

  net.unbind(kA);
  net.send(kB, kA, Transport::udp, {'t'});
  net.run();
  CHECK(sink.got.size() == 1);  // nothing new
  CHECK(net.dropped_unroutable() == 1);
}

TEST_CASE("event network transcript records packets and notes, capped") {
  SimNetwork net;
  Sink sink;
  net.bind(kA, &sink);
  net.enable_transcript(3);
  net.note("scenario begins");
  net.send(kB, kA, Transport::udp, serialize_message(make_query(1, name_of("a.example"), RrType::A)));
  net.send(kB, kA, Transport::udp, {0x00});  // unparseable
  net.send(kB, kA, Transport::udp, {0x01});
  net.run();
  REQUIRE(net.transcript().size() == 3);
  CHECK(net.transcript()[0] == "-- scenario begins");
  CHECK(net.transcript()[1].find("a.example") != std::string::npos);
  CHECK(net.transcript()[2].find("unparseable") != std::string::npos);
  CHECK(net.transcript_suppressed() == 1);
}

TEST_CASE("stub node refuses special-byte lookups and times out on dead servers") {
  SimNetwork net;
  LabTopology topo;

  SECTION("special bytes rejected before anything is sent") {
    StubNode stub(net, topo.stub, topo.forwarder_lan, {}, 1);
    stub.lookup(net, name_of(std::string("www.victim.com\0.attacker.com", 28)));
    REQUIRE(stub.done());
    CHECK(stub.result().status == StubStatus::rejected_input);
    CHECK(stub.result().queries_sent == 0);
  }

  SECTION("no server bound: retransmit once, then timeout") {
    StubNode stub(net, topo.stub, topo.forwarder_lan, {}, 1);
    stub.lookup(net, name_of("www.example.com"));
    net.run();
    REQUIRE(stub.done());
    CHECK(stub.result().status == StubStatus::timeout);
    CHECK(stub.result().queries_sent == 2);  // original + one retransmit
    CHECK(net.dropped_unroutable() == 2);
  }
}

// ---------------------------------------------------------------------------
// Alias-chase injection, per device profile.
// ---------------------------------------------------------------------------

TEST_CASE("alias chase with embedded zero byte poisons flat-keyed caches") {
  for (const char* name : {"dproxy-like", "dnrd-like", "tenda-like"}) {
    DYNAMIC_SECTION(name) {
      auto out = run_xdri_cname_chase(builtin_profile(name), 11);
      INFO(out.failure_reason << " / " << out.notes);
      CHECK(out.success);
      CHECK(out.packets_sent_by_attacker == 0);
      REQUIRE(out.poisoned_mapping.has_value());
      CHECK(out.poisoned_mapping->first == "www.victim.com.");
      CHECK(out.poisoned_mapping->second == "6.6.6.6");
      CHECK(out.cache_persisted);
      CHECK(out.notes.find("ok") != std::string::npos);
    }
  }
}

TEST_CASE("alias chase fails against strict or re-encoding forwarders") {
  for (const char* name : {"dnsmasq-like", "bintec-like"}) {
    DYNAMIC_SECTION(name) {
      auto out = run_xdri_cname_chase(builtin_profile(name), 11);
      CHECK_FALSE(out.success);
      CHECK_FALSE(out.poisoned_mapping.has_value());
      CHECK(out.failure_reason.find("genuine") != std::string::npos);
    }
  }
}

TEST_CASE("alias chase with embedded dots behaves like the zero-byte variant") {
  ChaseOptions opt;
  opt.dot_variant = true;
  auto hit = run_xdri_cname_chase(builtin_profile("dproxy-like"), 12, opt);
  CHECK(hit.success);
  REQUIRE(hit.poisoned_mapping.has_value());
  CHECK(hit.poisoned_mapping->first == "www.victim.com.");

  auto miss = run_xdri_cname_chase(builtin_profile("dnsmasq-like"), 12, opt);
  CHECK_FALSE(miss.success);
}

TEST_CASE("alias chase is deterministic for a fixed seed") {
  auto a = run_xdri_cname_chase(builtin_profile("dproxy-like"), 77);
  auto b = run_xdri_cname_chase(builtin_profile("dproxy-like"), 77);
  CHECK(a.success == b.success);
  CHECK(a.transcript == b.transcript);
}

// ---------------------------------------------------------------------------
// Off-path response forgery.
// ---------------------------------------------------------------------------

TEST_CASE("known txid with a static port needs exactly one forged packet") {
  ForwarderProfile p;
  p.name = "echo-static-port";
  p.cache_model = CacheModel::qname_addr_map;
  p.decoder = Decoder::naive;
  p.txid_policy = TxidPolicy::forward_client;
  p.port_policy = PortPolicy::static_port;
  p.static_port = 5353;
  p.cd_policy = CdPolicy::forward_and_cache;
  p.validate();

  auto out = run_txid_known_attack(p, 21);
  INFO(out.failure_reason << " / " << out.notes);
  REQUIRE(out.success);
  CHECK(out.packets_sent_by_attacker == 1);
  CHECK(out.cache_persisted);
  CHECK(out.notes.find("both known") != std::string::npos);
}

TEST_CASE("port sweep with a forwarded txid always lands within one sweep") {
  auto out = run_txid_known_attack(builtin_profile("dproxy-like"), 21);
  INFO(out.failure_reason);
  REQUIRE(out.success);
  CHECK(out.packets_sent_by_attacker <= 64512);
  CHECK(out.packets_sent_by_attacker > 0);
  CHECK(out.notes.find("sweeping") != std::string::npos);
  REQUIRE(out.poisoned_mapping.has_value());
  CHECK(out.poisoned_mapping->first == "www.victim.com.");
  CHECK(out.poisoned_mapping->second == "6.6.6.6");
  CHECK(out.cache_persisted);
}

TEST_CASE("port sweep fails when the forwarder rewrites the txid") {
  auto out = run_txid_known_attack(builtin_profile("dnrd-like"), 21);
  CHECK_FALSE(out.success);
  CHECK(out.failure_reason.find("genuine") != std::string::npos);
  CHECK(out.packets_sent_by_attacker == 64512);  // full sweep, no hit
}

TEST_CASE("txid sweep at a predicted port defeats boot-stable ports") {
  auto out = run_static_port_attack(builtin_profile("tenda-like"), 31);
  INFO(out.failure_reason << " / " << out.notes);
  REQUIRE(out.success);
  CHECK(out.packets_sent_by_attacker <= 65536);
  CHECK(out.notes.find("predicted") != std::string::npos);
  REQUIRE(out.poisoned_mapping.has_value());
  CHECK(out.poisoned_mapping->second == "6.6.6.6");
  CHECK(out.cache_persisted);
}

TEST_CASE("txid sweep is hopeless when every query uses a fresh port") {
  auto out = run_static_port_attack(builtin_profile("dnsmasq-like"), 31);
  CHECK_FALSE(out.success);
  CHECK(out.notes.find("not predictable") != std::string::npos);
}

TEST_CASE("forged delivery can succeed without any cache to poison") {
  ForwarderProfile p;
  p.name = "relay-static-port";
  p.cache_model = CacheModel::none;
  p.decoder = Decoder::strict;
  p.txid_policy = TxidPolicy::fresh_random;
  p.port_policy = PortPolicy::static_port;
  p.static_port = 5353;
  p.cd_policy = CdPolicy::clear_flag;
  p.validate();

  auto out = run_static_port_attack(p, 41);
  INFO(out.failure_reason << " / " << out.notes);
  REQUIRE(out.success);  // the lured client got the forgery...
  REQUIRE(out.poisoned_mapping.has_value());
  CHECK(out.poisoned_mapping->second == "6.6.6.6");
  CHECK_FALSE(out.cache_persisted);  // ...but nothing persisted
  CHECK(out.notes.find("nothing persisted") != std::string::npos);
}

TEST_CASE("blind forgery against random port and txid misses a small budget") {
  SpoofOptions opt;
  opt.budget = 2000;
  auto out = run_blind_spoof_attack(builtin_profile("dnsmasq-like"), 51, opt);
  CHECK_FALSE(out.success);
  CHECK(out.packets_sent_by_attacker == 2000);
}

TEST_CASE("spoof flood outcomes are deterministic for a fixed seed") {
  auto a = run_spoof_flood_attack(builtin_profile("dproxy-like"), 61);
  auto b = run_spoof_flood_attack(builtin_profile("dproxy-like"), 61);
  CHECK(a.packets_sent_by_attacker == b.packets_sent_by_attacker);
  CHECK(a.success == b.success);
}

// ---------------------------------------------------------------------------
// Checking-disabled relay abuse.
// ---------------------------------------------------------------------------

TEST_CASE("cd relay with caching serves tampered answers to honest clients") {
  auto out = run_cd_disable_attack(builtin_profile("dproxy-like"), 71);
  INFO(out.failure_reason << " / " << out.notes);
  REQUIRE(out.success);
  REQUIRE(out.poisoned_mapping.has_value());
  CHECK(out.poisoned_mapping->first == "www.secure.example.");
  CHECK(out.poisoned_mapping->second == "6.6.6.6");
  CHECK(out.cache_persisted);
  CHECK(out.notes.find("6.6.6.6") != std::string::npos);
}

TEST_CASE("clearing the cd bit keeps upstream validation in the loop") {
  auto out = run_cd_disable_attack(builtin_profile("dnrd-like"), 71);
  CHECK_FALSE(out.success);
  CHECK(out.failure_reason.find("cleared") != std::string::npos);
}

TEST_CASE("cd relay without caching cannot poison honest clients") {
  auto out = run_cd_disable_attack(builtin_profile("dnsmasq-like"), 71);
  CHECK_FALSE(out.success);
  CHECK(out.notes.find("6.6.6.6") != std::string::npos);  // attacker saw it...
  CHECK(out.failure_reason.find("not cached") != std::string::npos);
}

// ---------------------------------------------------------------------------
// TTL survey.
// ---------------------------------------------------------------------------

TEST_CASE("address-map caches pin every answer to a synthetic 60s lifetime") {
  auto s = run_ttl_survey(builtin_profile("dproxy-like"), 81, {5, 120, 600, 0});
  CHECK(s.le60 == 4);
  CHECK(s.le300 == 0);
  CHECK(s.gt300 == 0);
  CHECK(s.not_cached == 0);
  for (const auto& [upstream, seen] : s.samples) {
    REQUIRE(seen.has_value());
    CHECK(*seen == 60);
  }
}

TEST_CASE("record caches respect upstream lifetimes and skip zero") {
  auto s = run_ttl_survey(builtin_profile("dnsmasq-like"), 81, {5, 120, 600, 0});
  CHECK(s.le60 == 1);
  CHECK(s.le300 == 1);
  CHECK(s.gt300 == 1);
  CHECK(s.not_cached == 1);
  CHECK(s.samples[0].second == std::optional<std::uint32_t>{5});
  CHECK(s.samples[2].second == std::optional<std::uint32_t>{600});
  CHECK_FALSE(s.samples[3].second.has_value());
}

TEST_CASE("a cacheless relay never answers from memory") {
  ForwarderProfile p;
  p.name = "no-cache";
  p.cache_model = CacheModel::none;
  p.decoder = Decoder::strict;
  p.txid_policy = TxidPolicy::fresh_random;
  p.port_policy = PortPolicy::random_per_query;
  p.cd_policy = CdPolicy::clear_flag;
  p.validate();
  auto s = run_ttl_survey(p, 81, {5, 120});
  CHECK(s.not_cached == 2);
}
