// Exercises the loopback deployment: the same forwarder and resolver state
// machines as the simulation, but served over real UDP/TCP sockets, plus the
// socket-based scan transport with its JSON-lines upstream tap.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "dnslab/attacks.hpp"
#include "dnslab/live.hpp"
#include "dnslab/scanner.hpp"

using namespace dnslab;

namespace {

// Bundles a live upstream + forwarder pair on ephemeral loopback ports, each
// polled by its own thread until the guard goes out of scope.
struct LiveRig {
  LiveUpstream upstream;
  LiveForwarder forwarder;
  std::atomic<bool> stop{false};
  std::thread ns_thread;
  std::thread fwd_thread;

  static LiveUpstreamOptions upstream_options(const std::string& tap_path) {
    LiveUpstreamOptions o;
    o.listen = *Endpoint::parse("127.0.0.1:0");
    o.tap_log = tap_path;
    return o;
  }

  LiveRig(const ForwarderProfile& profile, std::uint64_t seed, const std::string& tap_path)
      : upstream(upstream_options(tap_path)),
        forwarder(profile, seed,
                  LiveForwarderOptions{*Endpoint::parse("127.0.0.1:0"), upstream.endpoint(), 0}) {
    ns_thread = std::thread([this] { upstream.run(stop, 10); });
    fwd_thread = std::thread([this] { forwarder.run(stop, 10); });
  }

  ~LiveRig() {
    stop.store(true);
    ns_thread.join();
    fwd_thread.join();
  }
};

}  // namespace

TEST_CASE("live scan over loopback sockets matches the simulated verdicts") {
  const std::string tap_path = "live-test-tap.jsonl";
  std::remove(tap_path.c_str());
  LiveRig rig(builtin_profile("dproxy-like"), 7, tap_path);

  UdpScanTransportOptions topt;
  topt.timeout_ms = 2000;
  topt.tap_path = tap_path;
  UdpScanTransport io(rig.forwarder.endpoint(), std::move(topt));

  ScanOptions opt;
  opt.seed = 3;
  opt.target_label = "live-dproxy";
  Scanner scanner(io, std::move(opt));
  ScanReport report = scanner.run();

  CHECK(report.reachable);
  CHECK(report.baseline_ok);
  CHECK(report.flags() == "abde");
  CHECK(report.overall() == Verdict::vulnerable);
  // The tap is what proves txid forwarding: without upstream visibility the
  // scanner would have to report the txid verdict as inconclusive.
  CHECK(report.txid == TxidBehavior::forwarded);
  CHECK(report.port == PortBehavior::stable_unverified);
  // Reboots are not available over a plain socket, so the stable-port verdict
  // must rest on the boot-stable observation alone: no reboot log entry.
  CHECK(report.log.end() ==
        std::find_if(report.log.begin(), report.log.end(), [](const std::string& l) {
          return l.find("reboot") != std::string::npos;
        }));
  std::remove(tap_path.c_str());
}

TEST_CASE("live scan of a hardened profile comes back clean") {
  const std::string tap_path = "live-test-tap-clean.jsonl";
  std::remove(tap_path.c_str());
  LiveRig rig(builtin_profile("dnsmasq-like"), 11, tap_path);

  UdpScanTransportOptions topt;
  topt.timeout_ms = 2000;
  topt.tap_path = tap_path;
  UdpScanTransport io(rig.forwarder.endpoint(), std::move(topt));

  Scanner scanner(io, ScanOptions{.seed = 5, .target_label = "live-dnsmasq"});
  ScanReport report = scanner.run();

  CHECK(report.reachable);
  CHECK(report.flags().empty());
  CHECK(report.overall() == Verdict::safe);
  CHECK(report.caches == true);
  CHECK(report.tcp_works == true);
  std::remove(tap_path.c_str());
}

TEST_CASE("live forwarder answers framed queries over tcp when the profile supports it") {
  LiveRig rig(builtin_profile("dnsmasq-like"), 2, "");
  UdpScanTransport io(rig.forwarder.endpoint(), UdpScanTransportOptions{.timeout_ms = 2000});

  LabNames names;
  auto wire = serialize_message(make_query(0x4242, names.upstream_baseline, RrType::A));
  WireReply rep = io.exchange(wire, Transport::tcp);
  REQUIRE(rep.replied);
  ParseResult parsed = parse_message(rep.raw);
  REQUIRE(parsed.ok());
  CHECK(parsed.message.txid == 0x4242);
  CHECK(first_a_rdata(parsed.message) == kVictimAddr);
}

TEST_CASE("live forwarder without tcp support refuses the connection") {
  LiveRig rig(builtin_profile("dproxy-like"), 2, "");
  UdpScanTransport io(rig.forwarder.endpoint(), UdpScanTransportOptions{.timeout_ms = 1000});

  LabNames names;
  auto wire = serialize_message(make_query(0x4343, names.upstream_baseline, RrType::A));
  WireReply rep = io.exchange(wire, Transport::tcp);
  CHECK_FALSE(rep.replied);
}

TEST_CASE("live udp exchange resolves through the forwarder to the upstream zones") {
  const std::string tap_path = "live-test-tap-udp.jsonl";
  std::remove(tap_path.c_str());
  LiveRig rig(builtin_profile("tenda-like"), 4, tap_path);

  UdpScanTransportOptions topt;
  topt.timeout_ms = 2000;
  topt.tap_path = tap_path;
  UdpScanTransport io(rig.forwarder.endpoint(), std::move(topt));

  LabNames names;
  auto wire = serialize_message(make_query(0x1111, names.upstream_baseline, RrType::A));
  WireReply rep = io.exchange(wire, Transport::udp);
  REQUIRE(rep.replied);
  ParseResult parsed = parse_message(rep.raw);
  REQUIRE(parsed.ok());
  CHECK(first_a_rdata(parsed.message) == kVictimAddr);

  // The tap must show the forwarder's actual source port, which for this
  // profile is pinned by its boot-time clock seeding.
  REQUIRE(io.tap_available());
  auto taps = io.drain_tap();
  REQUIRE_FALSE(taps.empty());
  CHECK(taps.back().src_port == 52536);
  CHECK(names_equal_ci(taps.back().qname, names.upstream_baseline));
  std::remove(tap_path.c_str());
}

TEST_CASE("live reboot rebinds sockets and keeps a clock-reset port pinned") {
  LiveForwarderOptions opt;
  opt.listen = *Endpoint::parse("127.0.0.1:0");
  opt.upstream = *Endpoint::parse("127.0.0.1:5399");  // never contacted here
  opt.boot_unix_seconds = 1000;
  LiveForwarder fwd(builtin_profile("tenda-like"), 9, std::move(opt));

  REQUIRE(fwd.core().boot_port().has_value());
  CHECK(*fwd.core().boot_port() == 52536);
  Endpoint before = fwd.endpoint();

  fwd.reboot(999999);
  CHECK(*fwd.core().boot_port() == 52536);
  // The client-facing socket survives reboots at the same address.
  CHECK(fwd.endpoint() == before);
}
