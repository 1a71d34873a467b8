#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnslab/nodes.hpp"
#include "dnslab/zoneset.hpp"

namespace dnslab {

/// Result of one end-to-end attack scenario. `success` means a victim-side
/// client received the forged answer, and `poisoned_mapping` then records
/// which name was bound to which address. `cache_persisted` reports whether a
/// fresh, honest query afterwards *still* returned the forged address. Every
/// verdict comes from delivered answers, never from peeking into the
/// forwarder's internal state.
struct AttackOutcome {
  bool success = false;
  std::uint64_t packets_sent_by_attacker = 0;
  std::optional<std::pair<std::string, std::string>> poisoned_mapping;
  bool cache_persisted = false;
  std::string failure_reason;  // empty on success
  std::string notes;
  std::vector<std::string> transcript;
};

namespace detail {

struct ScenarioRig {
  LabNames names;
  LabTopology topo;
  SimNetwork net;
  AttackerNameserver ns;
  RecursiveNode upstream;
  ForwarderNode fwd;
  ClientNode honest;

  ScenarioRig(const ForwarderProfile& profile, std::uint64_t seed,
              std::vector<ZoneScript> zones, RecursiveConfig rcfg = {},
              bool transcript = true)
      : upstream(net, topo.upstream, rcfg),
        fwd(net, profile, seed, topo),
        honest(net, topo.honest_client, topo.forwarder_lan) {
    if (transcript) net.enable_transcript();
    for (auto& z : zones) ns.add_zone(std::move(z));
    upstream.resolver().add_server(&ns);
  }

  /// Fresh honest query for `victim`; true when the delivered answer is the
  /// forged payload address.
  bool verify_poisoned(const DnsName& victim) {
    honest.clear();
    honest.send_query(net, make_query(0x4242, victim, RrType::A));
    net.run_until([&] { return honest.response_count() > 0; }, 100000);
    return honest.response_count() > 0 &&
           first_a_rdata(honest.last_response()) == kPayloadAddr;
  }

  void finish(AttackOutcome& out) {
    out.transcript = net.transcript();
    if (net.transcript_suppressed() > 0)
      out.transcript.push_back("(+" + std::to_string(net.transcript_suppressed()) +
                               " more packets)");
  }
};

inline std::vector<std::uint8_t> forged_response(const DnsName& victim, std::uint32_t addr) {
  DnsMessage resp;
  resp.flags.qr = true;
  resp.flags.rd = true;
  resp.flags.ra = true;
  resp.questions.push_back({victim, RrType::A, RrClass::IN});
  resp.answers.push_back({victim, RrType::A, RrClass::IN, 300, ARdata{addr}});
  return serialize_message(resp);
}

inline std::string dotted(std::uint32_t addr) { return ipv4_to_string(addr); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario 1: special-character injection via a chased alias.
//
// The victim's own device looks up an innocent-looking attacker name. The
// authoritative server answers with an alias whose target embeds a zero byte
// (or literal dots) and, the first time, *no* address — so the stub itself
// issues a follow-up query for the special name through the forwarder. The
// second authoritative answer then poisons forwarders that key their cache on
// the flattened name. The attacker never spoofs a single packet.
// ---------------------------------------------------------------------------

struct ChaseOptions {
  bool dot_variant = false;  // false: embedded zero byte; true: embedded dots
  StubConfig stub;
};

inline AttackOutcome run_xdri_cname_chase(const ForwarderProfile& profile, std::uint64_t seed,
                                          const ChaseOptions& opt = {}) {
  AttackOutcome out;
  detail::ScenarioRig rig(profile, seed, builtin_chase_zones(opt.dot_variant));
  StubNode stub(rig.net, rig.topo.stub, rig.topo.forwarder_lan, opt.stub, seed ^ 0x57AB);

  DnsName trigger = opt.dot_variant ? rig.names.chase_dot_trigger : rig.names.chase_zero_trigger;
  rig.net.note("stub looks up " + name_to_presentation(trigger));
  stub.lookup(rig.net, trigger);
  auto run = rig.net.run_until([&] { return stub.done(); }, 100000);
  if (!stub.done()) {
    out.failure_reason = run.quiescent ? "scenario stalled: stub never finished"
                                       : "event budget exhausted";
    rig.finish(out);
    return out;
  }
  out.notes = std::string("stub lookup: ") + to_string(stub.result().status) +
              ", queries sent: " + std::to_string(stub.result().queries_sent);

  rig.net.note("honest client verifies " + name_to_presentation(rig.names.chase_victim));
  bool poisoned = rig.verify_poisoned(rig.names.chase_victim);
  out.success = poisoned;
  out.cache_persisted = poisoned;
  out.packets_sent_by_attacker = 0;  // entirely spoof-free
  if (poisoned)
    out.poisoned_mapping = {{name_to_presentation(rig.names.chase_victim),
                             detail::dotted(kPayloadAddr)}};
  else
    out.failure_reason = "honest query still resolves to the genuine address";
  rig.finish(out);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario 2: off-path response forgery against an in-flight query.
//
// The attacker controls a LAN client (or lures one) to query the victim name,
// then floods forged responses at the forwarder's WAN side before the genuine
// answer arrives. Three guessing strategies:
//   ports_with_known_txid — the forwarder reuses the client's txid; when the
//                           port is derivable from the device model (constant
//                           or boot-time arithmetic) a single packet suffices,
//                           otherwise the ephemeral range is swept.
//   txids_at_known_port   — the port is assumed known (this scenario's
//                           premise: any boot-stable port is learnable), so
//                           only the txid must be swept (<= 65536 shots).
//   blind                 — both unknown: uniform random (port, txid) pairs.
// ---------------------------------------------------------------------------

enum class SpoofStrategy { ports_with_known_txid, txids_at_known_port, blind };

namespace detail {

/// The port an attacker can compute offline from the device model alone:
/// configured constants and boot-time arithmetic qualify; a port rolled
/// randomly at boot does not, even though it stays put afterwards.
inline std::optional<std::uint16_t> model_derivable_port(const Forwarder& fwd) {
  PortPolicy policy = fwd.profile().port_policy;
  if (policy == PortPolicy::static_port || policy == PortPolicy::time_seeded_at_boot)
    return fwd.predictable_port();
  return std::nullopt;
}

}  // namespace detail

struct SpoofOptions {
  SpoofStrategy strategy = SpoofStrategy::ports_with_known_txid;
  std::uint32_t budget = 65536;
  SimTime spacing_us = 1;
  std::uint16_t client_txid = 0x1337;  // chosen by the attacker's client
  // Extra delay before the genuine upstream answer; defaults to just past the
  // full flood so the race is attacker-favorable but bounded.
  std::optional<SimTime> genuine_delay_us;
};

inline AttackOutcome run_spoof_flood_attack(const ForwarderProfile& profile, std::uint64_t seed,
                                            const SpoofOptions& opt = {}) {
  AttackOutcome out;
  detail::ScenarioRig rig(profile, seed, builtin_chase_zones(false), {});
  const DnsName& victim = rig.names.chase_victim;

  SimTime genuine_delay =
      opt.genuine_delay_us.value_or(opt.spacing_us * (opt.budget + 2) + 10000);
  rig.upstream.set_response_delay_us(genuine_delay);

  ClientNode lured(rig.net, rig.topo.attacker_client, rig.topo.forwarder_lan);

  SeededRng rng(seed ^ 0xF100D);
  SpooferNode::Plan plan;
  plan.spoofed_src = rig.topo.upstream;
  plan.target_addr = rig.topo.forwarder_wan_addr;
  plan.payload = detail::forged_response(victim, kPayloadAddr);
  plan.spacing_us = opt.spacing_us;
  switch (opt.strategy) {
    case SpoofStrategy::ports_with_known_txid: {
      if (auto derived = detail::model_derivable_port(rig.fwd.forwarder())) {
        plan.shots.push_back({*derived, opt.client_txid});
        out.notes = "txid and port both known; single forged packet at port " +
                    std::to_string(*derived);
        break;
      }
      std::vector<std::uint16_t> ports;
      for (std::uint32_t p = kEphemeralLo; p <= kEphemeralHi; ++p)
        ports.push_back(static_cast<std::uint16_t>(p));
      for (std::size_t i = ports.size(); i > 1; --i)
        std::swap(ports[i - 1], ports[rng.uniform(0, static_cast<std::uint32_t>(i - 1))]);
      for (std::uint16_t p : ports) {
        if (plan.shots.size() >= opt.budget) break;
        plan.shots.push_back({p, opt.client_txid});
      }
      out.notes = "port unknown; sweeping the ephemeral range with the known txid";
      break;
    }
    case SpoofStrategy::txids_at_known_port: {
      std::uint16_t port;
      if (auto knowable = rig.fwd.forwarder().predictable_port()) {
        port = *knowable;
        out.notes = "target port " + std::to_string(port) + " predicted from device behavior";
      } else {
        port = static_cast<std::uint16_t>(rng.uniform(kEphemeralLo, kEphemeralHi));
        out.notes = "target port not predictable; guessed " + std::to_string(port);
      }
      for (std::uint32_t t = 0; t <= 0xFFFF && plan.shots.size() < opt.budget; ++t)
        plan.shots.push_back({port, static_cast<std::uint16_t>(t)});
      break;
    }
    case SpoofStrategy::blind: {
      for (std::uint32_t i = 0; i < opt.budget; ++i)
        plan.shots.push_back({static_cast<std::uint16_t>(rng.uniform(0, 65535)),
                              static_cast<std::uint16_t>(rng.uniform(0, 65535))});
      break;
    }
  }
  SpooferNode spoofer(std::move(plan));

  lured.send_query(rig.net, make_query(opt.client_txid, victim, RrType::A));
  spoofer.start(rig.net);

  std::uint64_t max_events = static_cast<std::uint64_t>(opt.budget) * 3 + 20000;
  rig.net.run_until([&] { return lured.response_count() > 0; }, max_events);
  spoofer.stop();
  out.packets_sent_by_attacker = spoofer.packets_sent();

  if (lured.response_count() == 0) {
    out.failure_reason = "no answer delivered at all";
    rig.finish(out);
    return out;
  }
  bool forged_won = first_a_rdata(lured.last_response()) == kPayloadAddr;
  out.success = forged_won;
  if (!forged_won) {
    out.failure_reason = "spoof budget exhausted; the genuine upstream answer won the race";
  } else {
    out.poisoned_mapping = {{name_to_presentation(victim), detail::dotted(kPayloadAddr)}};
    out.cache_persisted = rig.verify_poisoned(victim);
    if (!out.cache_persisted) {
      if (!out.notes.empty()) out.notes += "; ";
      out.notes += "forgery delivered to the client only; nothing persisted in a cache";
    }
  }
  rig.finish(out);
  return out;
}

/// The transaction id is known to the attacker (a malicious inside client
/// chose it and the device forwards it); the source port may have to be swept.
inline AttackOutcome run_txid_known_attack(const ForwarderProfile& profile, std::uint64_t seed,
                                           SpoofOptions opt = {}) {
  opt.strategy = SpoofStrategy::ports_with_known_txid;
  return run_spoof_flood_attack(profile, seed, opt);
}

/// The upstream source port is known (constant, boot-time arithmetic, or
/// leaked once and stable); the transaction id is swept.
inline AttackOutcome run_static_port_attack(const ForwarderProfile& profile, std::uint64_t seed,
                                            SpoofOptions opt = {}) {
  opt.strategy = SpoofStrategy::txids_at_known_port;
  return run_spoof_flood_attack(profile, seed, opt);
}

/// Neither challenge value known: uniform random (port, txid) guesses.
inline AttackOutcome run_blind_spoof_attack(const ForwarderProfile& profile, std::uint64_t seed,
                                            SpoofOptions opt = {}) {
  opt.strategy = SpoofStrategy::blind;
  return run_spoof_flood_attack(profile, seed, opt);
}

// ---------------------------------------------------------------------------
// Scenario 3: disabling upstream validation from the client side.
//
// An on-path adversary between the forwarder and its validating upstream
// corrupts answers from a signed zone. Directly, the upstream catches the
// forgery (SERVFAIL). But a malicious LAN client sets the checking-disabled
// bit; a forwarder that relays that bit *and caches the answer* serves the
// forgery to every later client that asked for checking.
// ---------------------------------------------------------------------------

inline AttackOutcome run_cd_disable_attack(const ForwarderProfile& profile, std::uint64_t seed) {
  AttackOutcome out;
  detail::ScenarioRig rig(profile, seed, builtin_secure_zones());
  const DnsName& victim = rig.names.secure_victim;
  rig.upstream.resolver().set_tamper([&](DnsMessage& m) {
    for (auto& rr : m.answers) {
      if (rr.type == RrType::A) rr.rdata = ARdata{kPayloadAddr};
      if (rr.type == RrType::VSTAMP) std::get<VstampRdata>(rr.rdata).valid = false;
    }
  });

  ClientNode malicious(rig.net, rig.topo.attacker_client, rig.topo.forwarder_lan);
  rig.net.note("malicious client queries with checking disabled");
  malicious.send_query(rig.net, make_query(0x1001, victim, RrType::A, RrClass::IN, true,
                                           /*cd=*/true));
  rig.net.run_until([&] { return malicious.response_count() > 0; }, 100000);
  out.packets_sent_by_attacker = 1;  // one ordinary client query, no spoofing

  if (malicious.response_count() == 0) {
    out.failure_reason = "no answer to the checking-disabled query";
    rig.finish(out);
    return out;
  }
  const DnsMessage& step1 = malicious.last_response();
  if (step1.flags.rcode == kRcodeServFail) {
    out.failure_reason = "forwarder cleared the checking-disabled bit; upstream validation held";
    rig.finish(out);
    return out;
  }
  out.notes = "checking-disabled answer delivered: " +
              (first_a_rdata(step1) ? detail::dotted(*first_a_rdata(step1)) : std::string("-"));

  rig.net.note("honest client asks with checking enabled");
  bool poisoned = rig.verify_poisoned(victim);
  out.success = poisoned;
  out.cache_persisted = poisoned;
  if (poisoned)
    out.poisoned_mapping = {{name_to_presentation(victim), detail::dotted(kPayloadAddr)}};
  else
    out.failure_reason = "forged answer was relayed but not cached; honest queries revalidate";
  rig.finish(out);
  return out;
}

// ---------------------------------------------------------------------------
// TTL handling survey: what lifetime does a client actually observe for a
// cached answer, across a range of upstream TTLs?
// ---------------------------------------------------------------------------

struct TtlSurvey {
  int le60 = 0;
  int le300 = 0;
  int gt300 = 0;
  int not_cached = 0;
  std::vector<std::pair<std::uint32_t, std::optional<std::uint32_t>>> samples;
};

inline TtlSurvey run_ttl_survey(const ForwarderProfile& profile, std::uint64_t seed,
                                const std::vector<std::uint32_t>& upstream_ttls) {
  TtlSurvey survey;
  ZoneScript zone;
  zone.apex = name_of("survey.example");
  for (std::size_t i = 0; i < upstream_ttls.size(); ++i)
    zone.entries.push_back(detail::entry_a(
        name_of("n" + std::to_string(i) + ".survey.example"), upstream_ttls[i], kProbeAddr));

  detail::ScenarioRig rig(profile, seed, {zone}, {}, /*transcript=*/false);
  ClientNode client(rig.net, rig.topo.scanner, rig.topo.forwarder_lan);

  // "Served from the forwarder's cache" means the repeat query never reached
  // the upstream resolver — its tap is the ground truth (the resolver has a
  // cache of its own, so authority-side query counts would mislead here).
  auto upstream_saw = [&](const DnsName& n) {
    std::size_t c = 0;
    for (const auto& t : rig.upstream.taps())
      if (names_equal_ci(t.qname, n)) ++c;
    return c;
  };

  for (std::size_t i = 0; i < upstream_ttls.size(); ++i) {
    DnsName name = name_of("n" + std::to_string(i) + ".survey.example");
    client.clear();
    client.send_query(rig.net, make_query(static_cast<std::uint16_t>(i * 2 + 1), name, RrType::A));
    rig.net.run_until([&] { return client.response_count() > 0; }, 50000);
    std::size_t first_pass = upstream_saw(name);

    client.clear();
    client.send_query(rig.net, make_query(static_cast<std::uint16_t>(i * 2 + 2), name, RrType::A));
    rig.net.run_until([&] { return client.response_count() > 0; }, 50000);

    bool answered = client.response_count() > 0 && !client.last_response().answers.empty();
    bool from_cache = upstream_saw(name) == first_pass;
    if (!answered || !from_cache) {
      ++survey.not_cached;
      survey.samples.push_back({upstream_ttls[i], std::nullopt});
      continue;
    }
    std::uint32_t seen = client.last_response().answers[0].ttl;
    survey.samples.push_back({upstream_ttls[i], seen});
    if (seen <= 60) ++survey.le60;
    else if (seen <= 300) ++survey.le300;
    else ++survey.gt300;
  }
  return survey;
}

}  // namespace dnslab
