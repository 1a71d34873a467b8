#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dnslab/nodes.hpp"
#include "dnslab/zoneset.hpp"

namespace dnslab {

// ---------------------------------------------------------------------------
// Black-box forwarder scanner. It speaks to the device under test purely on
// the wire via a ScanTransport; when a measurement tap on the upstream side is
// available it also classifies transaction-id and source-port behavior.
// ---------------------------------------------------------------------------

struct WireReply {
  bool replied = false;
  std::vector<std::uint8_t> raw;
};

class ScanTransport {
public:
  virtual ~ScanTransport() = default;
  /// One query/response exchange; replied=false on timeout or drop.
  virtual WireReply exchange(const std::vector<std::uint8_t>& query_wire,
                             Transport transport) = 0;
  /// Upstream-side observation of the device's forwarded queries, if the
  /// deployment offers one (mirror port, cooperating resolver, shared host).
  virtual bool tap_available() const { return false; }
  virtual std::vector<TapObservation> drain_tap() { return {}; }
  /// Power-cycle hook for port-stability classification, if available.
  virtual bool reboot_available() const { return false; }
  virtual bool reboot() { return false; }
};

enum class Verdict { safe, vulnerable, inconclusive };
enum class TxidBehavior { forwarded, sequential, random_txid, unobservable };
enum class PortBehavior {
  fresh_per_query,
  stable_unverified,      // constant during the scan; no reboot hook to probe further
  stable_across_reboots,  // constant during the scan and after a power cycle
  changes_on_reboot,      // constant during the scan, re-rolled at boot
  unobservable
};
enum class CdBehavior { cleared, relayed_and_cached, relayed_only, unobservable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::safe: return "safe";
    case Verdict::vulnerable: return "vulnerable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}
inline const char* to_string(TxidBehavior v) {
  switch (v) {
    case TxidBehavior::forwarded: return "forwarded";
    case TxidBehavior::sequential: return "sequential";
    case TxidBehavior::random_txid: return "random";
    case TxidBehavior::unobservable: return "unobservable";
  }
  return "?";
}
inline const char* to_string(PortBehavior v) {
  switch (v) {
    case PortBehavior::fresh_per_query: return "fresh-per-query";
    case PortBehavior::stable_unverified: return "stable-unverified";
    case PortBehavior::stable_across_reboots: return "stable-across-reboots";
    case PortBehavior::changes_on_reboot: return "changes-on-reboot";
    case PortBehavior::unobservable: return "unobservable";
  }
  return "?";
}
inline const char* to_string(CdBehavior v) {
  switch (v) {
    case CdBehavior::cleared: return "cleared";
    case CdBehavior::relayed_and_cached: return "relayed-and-cached";
    case CdBehavior::relayed_only: return "relayed-only";
    case CdBehavior::unobservable: return "unobservable";
  }
  return "?";
}

struct ScanReport {
  std::string target_label;
  // Simulated targets get a fixed epoch label so seeded scans render
  // identically; live scans stamp wall-clock time here.
  std::string started_at = "simulated-epoch";
  bool reachable = false;
  bool baseline_ok = false;

  // Name-misinterpretation findings, one victim name per variant.
  Verdict zero_direct = Verdict::inconclusive;
  Verdict zero_chain = Verdict::inconclusive;
  Verdict dot_direct = Verdict::inconclusive;
  Verdict dot_chain = Verdict::inconclusive;

  TxidBehavior txid = TxidBehavior::unobservable;
  PortBehavior port = PortBehavior::unobservable;
  CdBehavior cd = CdBehavior::unobservable;

  // Raw entropy observations backing the verdicts above.
  std::vector<std::uint16_t> client_txids;
  std::vector<std::uint16_t> upstream_txids;
  std::vector<std::uint16_t> upstream_ports;

  // Side observations.
  std::optional<bool> caches;
  std::optional<bool> tcp_works;
  std::optional<bool> merges_chains;
  std::optional<bool> edns_intact;
  std::string version_banner;

  std::vector<std::string> log;

  bool misinterprets_names() const {
    return zero_direct == Verdict::vulnerable || zero_chain == Verdict::vulnerable ||
           dot_direct == Verdict::vulnerable || dot_chain == Verdict::vulnerable;
  }
  bool port_is_guessable() const {
    return port == PortBehavior::stable_unverified ||
           port == PortBehavior::stable_across_reboots ||
           port == PortBehavior::changes_on_reboot;
  }

  /// One letter per weakness class:
  ///   a  misinterprets special bytes in names (any variant)
  ///   b  forwards the client's transaction id upstream
  ///   c  uses sequential transaction ids
  ///   d  keeps one upstream source port across queries
  ///   e  relays checking-disabled upstream and caches the result
  std::string flags() const {
    std::string out;
    if (misinterprets_names()) out += 'a';
    if (txid == TxidBehavior::forwarded) out += 'b';
    if (txid == TxidBehavior::sequential) out += 'c';
    if (port_is_guessable()) out += 'd';
    if (cd == CdBehavior::relayed_and_cached) out += 'e';
    return out;
  }

  /// True iff any weakness class applies — the report's headline disjunction.
  bool any_attack() const { return !flags().empty(); }

  Verdict overall() const {
    if (!reachable) return Verdict::inconclusive;
    if (!flags().empty()) return Verdict::vulnerable;
    bool gaps = zero_direct == Verdict::inconclusive || zero_chain == Verdict::inconclusive ||
                dot_direct == Verdict::inconclusive || dot_chain == Verdict::inconclusive ||
                txid == TxidBehavior::unobservable || port == PortBehavior::unobservable ||
                cd == CdBehavior::unobservable;
    return gaps ? Verdict::inconclusive : Verdict::safe;
  }
};

struct ScanOptions {
  std::uint64_t seed = 1;
  int entropy_probes = 5;
  bool try_reboot = true;
  std::string target_label = "device-under-test";
  std::string started_at = "simulated-epoch";
  LabNames names;
};

class Scanner {
public:
  Scanner(ScanTransport& io, ScanOptions opt = {})
      : io_(io), opt_(std::move(opt)), rng_(opt_.seed) {}

  ScanReport run() {
    ScanReport r;
    r.target_label = opt_.target_label;
    r.started_at = opt_.started_at;
    baseline(r);
    if (!r.reachable) {
      r.log.push_back("target did not answer the baseline query; aborting");
      return r;
    }
    misinterpretation(r);
    entropy(r);
    cache_probe(r);
    chain_merge_probe(r);
    cd_probe(r);
    tcp_probe(r);
    version_probe(r);
    edns_probe(r);
    reboot_probe(r);  // last: a power cycle wipes device state
    return r;
  }

private:
  ScanTransport& io_;
  ScanOptions opt_;
  SeededRng rng_;

  std::optional<DnsMessage> ask(const DnsName& name, RrType type, bool cd = false,
                                RrClass cls = RrClass::IN,
                                Transport transport = Transport::udp) {
    DnsMessage q = make_query(rng_.txid(), name, type, cls, true, cd);
    WireReply rep = io_.exchange(serialize_message(q), transport);
    if (!rep.replied) return std::nullopt;
    ParseResult pr = parse_message(rep.raw);
    if (!pr.ok()) return std::nullopt;
    return pr.message;
  }

  static std::string describe_answer(const std::optional<DnsMessage>& m) {
    if (!m) return "no reply";
    if (m->flags.rcode != kRcodeNoError) return "rcode " + std::to_string(m->flags.rcode);
    if (auto a = first_a_rdata(*m)) return ipv4_to_string(*a);
    return "empty answer";
  }

  void baseline(ScanReport& r) {
    DnsName name = randomized_probe_name(opt_.names.baseline_base, rng_);
    auto resp = ask(name, RrType::A);
    r.reachable = resp.has_value();
    r.baseline_ok = resp && first_a_rdata(*resp) == std::optional<std::uint32_t>{kBaselineAddr};
    r.log.push_back("baseline " + name_to_presentation(name) + ": " + describe_answer(resp));
  }

  /// Plant a payload under `probe` (whose flattened spelling is `victim`),
  /// then check which address the device now serves for the victim name.
  Verdict misinterp_variant(ScanReport& r, const std::string& tag, const DnsName& probe,
                            const DnsName& victim) {
    auto planted = ask(probe, RrType::A);
    auto check = ask(victim, RrType::A);
    Verdict v = Verdict::inconclusive;
    if (check) {
      auto a = first_a_rdata(*check);
      if (a == std::optional<std::uint32_t>{kPayloadAddr}) v = Verdict::vulnerable;
      else if (a == std::optional<std::uint32_t>{kVictimAddr}) v = Verdict::safe;
    }
    r.log.push_back(tag + ": probe " + describe_answer(planted) + ", victim " +
                    name_to_presentation(victim) + " -> " + describe_answer(check) + " [" +
                    to_string(v) + "]");
    return v;
  }

  void misinterpretation(ScanReport& r) {
    const LabNames& n = opt_.names;
    r.zero_direct = misinterp_variant(
        r, "zero/direct",
        substitute_star(embedded_zero_name(n.victim_zero_direct, n.test_apex, true),
                        random_probe_label(rng_)),
        n.victim_zero_direct);
    r.zero_chain = misinterp_variant(
        r, "zero/chain", randomized_probe_name(n.zero_trigger_base, rng_), n.victim_zero_cname);
    r.dot_direct =
        misinterp_variant(r, "dot/direct", embedded_dot_name(n.victim_dot_direct), n.victim_dot_direct);
    r.dot_chain = misinterp_variant(r, "dot/chain", randomized_probe_name(n.dot_trigger_base, rng_),
                                    n.victim_dot_cname);
  }

  void entropy(ScanReport& r) {
    if (!io_.tap_available()) {
      r.log.push_back("entropy: no upstream tap; txid and port behavior unobservable");
      return;
    }
    io_.drain_tap();  // discard observations from earlier probes
    for (int i = 0; i < opt_.entropy_probes; ++i) {
      DnsName name = randomized_probe_name(opt_.names.probe_base, rng_);
      std::uint16_t ctxid = rng_.txid();
      DnsMessage q = make_query(ctxid, name, RrType::A);
      WireReply rep = io_.exchange(serialize_message(q), Transport::udp);
      (void)rep;
      for (const auto& obs : io_.drain_tap()) {
        if (!names_equal_ci(obs.qname, name)) continue;
        r.client_txids.push_back(ctxid);
        r.upstream_txids.push_back(obs.txid);
        r.upstream_ports.push_back(obs.src_port);
        break;
      }
    }
    if (r.upstream_txids.size() < static_cast<std::size_t>(opt_.entropy_probes)) {
      r.log.push_back("entropy: tap missed some probes; behavior unobservable");
      return;
    }

    bool all_forwarded = true, all_sequential = true;
    for (std::size_t i = 0; i < r.upstream_txids.size(); ++i) {
      if (r.upstream_txids[i] != r.client_txids[i]) all_forwarded = false;
      if (i > 0 && static_cast<std::uint16_t>(r.upstream_txids[i - 1] + 1) != r.upstream_txids[i])
        all_sequential = false;
    }
    r.txid = all_forwarded   ? TxidBehavior::forwarded
             : all_sequential ? TxidBehavior::sequential
                              : TxidBehavior::random_txid;

    std::set<std::uint16_t> distinct(r.upstream_ports.begin(), r.upstream_ports.end());
    if (distinct.size() == r.upstream_ports.size())
      r.port = PortBehavior::fresh_per_query;
    else if (distinct.size() == 1)
      r.port = PortBehavior::stable_unverified;
    else
      r.log.push_back("entropy: mixed port reuse pattern; port behavior unobservable");

    r.log.push_back(std::string("entropy: txid ") + to_string(r.txid) + ", port " +
                    to_string(r.port));
  }

  void cache_probe(ScanReport& r) {
    if (!io_.tap_available()) return;
    DnsName name = randomized_probe_name(opt_.names.probe_base, rng_);
    io_.drain_tap();
    ask(name, RrType::A);
    ask(name, RrType::A);
    std::size_t forwarded = 0;
    for (const auto& obs : io_.drain_tap())
      if (names_equal_ci(obs.qname, name)) ++forwarded;
    if (forwarded >= 1) r.caches = (forwarded == 1);
    r.log.push_back("cache: repeat query forwarded " + std::to_string(forwarded) + " time(s)");
  }

  void chain_merge_probe(ScanReport& r) {
    if (!r.caches.value_or(false)) return;  // needs a cache-served second answer
    DnsName name = randomized_probe_name(opt_.names.chain_base, rng_);
    ask(name, RrType::A);
    auto second = ask(name, RrType::A);
    if (!second || second->answers.empty()) return;
    bool has_alias = false, has_addr = false;
    for (const auto& rr : second->answers) {
      if (rr.type == RrType::CNAME) has_alias = true;
      if (rr.type == RrType::A) has_addr = true;
    }
    if (has_addr) r.merges_chains = !has_alias;
    r.log.push_back(std::string("alias chain served from cache: ") +
                    (has_alias ? "alias preserved" : "collapsed to a single address"));
  }

  void cd_probe(ScanReport& r) {
    DnsName name = randomized_probe_name(opt_.names.bad_sec_base, rng_);
    auto step1 = ask(name, RrType::A, /*cd=*/true);
    if (!step1) {
      r.log.push_back("cd: no reply to checking-disabled query");
      return;
    }
    if (step1->flags.rcode == kRcodeServFail) {
      r.cd = CdBehavior::cleared;
      r.log.push_back("cd: checking-disabled query still failed validation upstream [cleared]");
      return;
    }
    if (first_a_rdata(*step1) != std::optional<std::uint32_t>{kPayloadAddr}) {
      r.log.push_back("cd: unexpected first answer " + describe_answer(step1));
      return;
    }
    auto step2 = ask(name, RrType::A, /*cd=*/false);
    if (step2 && first_a_rdata(*step2) == std::optional<std::uint32_t>{kPayloadAddr}) {
      r.cd = CdBehavior::relayed_and_cached;
      r.log.push_back("cd: unvalidated answer later served to a checking client [relayed-and-cached]");
    } else {
      r.cd = CdBehavior::relayed_only;
      r.log.push_back("cd: unvalidated answer relayed but not cached [relayed-only]");
    }
  }

  void tcp_probe(ScanReport& r) {
    DnsName name = randomized_probe_name(opt_.names.probe_base, rng_);
    auto resp = ask(name, RrType::A, false, RrClass::IN, Transport::tcp);
    r.tcp_works = resp.has_value();
    r.log.push_back(std::string("tcp: ") + (*r.tcp_works ? "answered" : "dropped"));
  }

  void version_probe(ScanReport& r) {
    auto resp = ask(name_of("version.bind"), RrType::TXT, false, RrClass::CHAOS);
    if (resp)
      for (const auto& rr : resp->answers)
        if (rr.type == RrType::TXT)
          if (const auto* txt = std::get_if<TxtRdata>(&rr.rdata); txt && !txt->strings.empty())
            r.version_banner = txt->strings[0];
    r.log.push_back("version banner: " +
                    (r.version_banner.empty() ? std::string("(none)") : r.version_banner));
  }

  void edns_probe(ScanReport& r) {
    DnsName name = randomized_probe_name(opt_.names.probe_base, rng_);
    DnsMessage q = make_query(rng_.txid(), name, RrType::A);
    ResourceRecord opt_rr;
    opt_rr.name = DnsName{};  // root
    opt_rr.type = RrType::OPT;
    opt_rr.cls = RrClass::IN;
    opt_rr.ttl = 0;
    opt_rr.rdata = OpaqueRdata{};
    q.additional.push_back(std::move(opt_rr));
    WireReply rep = io_.exchange(serialize_message(q), Transport::udp);
    if (!rep.replied) return;
    r.edns_intact = parse_message(rep.raw).ok();
    r.log.push_back(std::string("edns: response ") + (*r.edns_intact ? "intact" : "mangled"));
  }

  void reboot_probe(ScanReport& r) {
    if (r.port != PortBehavior::stable_unverified || !opt_.try_reboot ||
        !io_.reboot_available() || r.upstream_ports.empty())
      return;
    std::uint16_t before = r.upstream_ports.back();
    if (!io_.reboot()) return;
    DnsName name = randomized_probe_name(opt_.names.probe_base, rng_);
    io_.drain_tap();
    ask(name, RrType::A);
    for (const auto& obs : io_.drain_tap()) {
      if (!names_equal_ci(obs.qname, name)) continue;
      r.upstream_ports.push_back(obs.src_port);
      r.port = (obs.src_port == before) ? PortBehavior::stable_across_reboots
                                        : PortBehavior::changes_on_reboot;
      r.log.push_back(std::string("reboot: port ") + std::to_string(before) + " -> " +
                      std::to_string(obs.src_port) + " [" + to_string(r.port) + "]");
      return;
    }
    r.log.push_back("reboot: post-reboot probe unobserved; port verdict unchanged");
  }
};

// ---------------------------------------------------------------------------
// Report rendering.
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const ScanReport& r) {
  nlohmann::json caps;
  auto put = [&](const char* key, const std::optional<bool>& v) {
    if (v) caps[key] = *v;
    else caps[key] = nullptr;
  };
  put("caches", r.caches);
  put("tcp", r.tcp_works);
  put("merges_chains", r.merges_chains);
  put("edns_intact", r.edns_intact);
  caps["version_banner"] = r.version_banner;

  return nlohmann::json{
      {"target", r.target_label},
      {"started_at", r.started_at},
      {"verdicts",
       {{"misinterpretation",
         {{"zero_direct", to_string(r.zero_direct)},
          {"zero_chain", to_string(r.zero_chain)},
          {"dot_direct", to_string(r.dot_direct)},
          {"dot_chain", to_string(r.dot_chain)}}},
        {"txid", to_string(r.txid)},
        {"port", to_string(r.port)},
        {"cd", to_string(r.cd)},
        {"flags", r.flags()},
        {"any_attack", r.any_attack()},
        {"overall", to_string(r.overall())}}},
      {"evidence",
       {{"reachable", r.reachable},
        {"baseline_ok", r.baseline_ok},
        {"observations",
         {{"client_txids", r.client_txids},
          {"upstream_txids", r.upstream_txids},
          {"upstream_ports", r.upstream_ports}}},
        {"capabilities", caps},
        {"log", r.log}}},
  };
}

inline std::string report_to_text(const ScanReport& r) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };
  line("scan report for " + r.target_label);
  line("  reachable:        " + std::string(r.reachable ? "yes" : "no"));
  if (!r.reachable) return out;
  line("  baseline:         " + std::string(r.baseline_ok ? "ok" : "unexpected answer"));
  line("  name handling:");
  line("    zero byte, direct query:   " + std::string(to_string(r.zero_direct)));
  line("    zero byte, via alias:      " + std::string(to_string(r.zero_chain)));
  line("    literal dot, direct query: " + std::string(to_string(r.dot_direct)));
  line("    literal dot, via alias:    " + std::string(to_string(r.dot_chain)));
  line("  txid behavior:    " + std::string(to_string(r.txid)));
  line("  port behavior:    " + std::string(to_string(r.port)));
  line("  cd handling:      " + std::string(to_string(r.cd)));
  auto cap = [&](const char* name, const std::optional<bool>& v, const char* yes,
                 const char* no) {
    line("  " + std::string(name) + std::string(v ? (*v ? yes : no) : "unknown"));
  };
  cap("caches answers:   ", r.caches, "yes", "no");
  cap("tcp service:      ", r.tcp_works, "yes", "no");
  cap("collapses chains: ", r.merges_chains, "yes", "no");
  cap("edns responses:   ", r.edns_intact, "intact", "mangled");
  line("  version banner:   " + (r.version_banner.empty() ? "(none)" : r.version_banner));
  std::string flags = r.flags();
  line("  weakness flags:   " + (flags.empty() ? "(none)" : flags));
  line("  any attack:       " + std::string(r.any_attack() ? "yes" : "no"));
  line("  overall:          " + std::string(to_string(r.overall())));
  return out;
}

// ---------------------------------------------------------------------------
// Simulated deployment of the scan harness: forwarder under test wired to a
// recursive resolver that serves the scanner's authoritative zones, with a
// tap and a reboot hook.
// ---------------------------------------------------------------------------

class SimScanTransport : public ScanTransport {
public:
  SimScanTransport(const ForwarderProfile& profile, std::uint64_t seed, LabNames names = {})
      : names_(std::move(names)),
        upstream_(net_, topo_.upstream),
        fwd_(net_, profile, seed, topo_),
        client_(net_, topo_.scanner, topo_.forwarder_lan) {
    for (auto& z : builtin_scan_zones(names_)) ns_.add_zone(std::move(z));
    upstream_.resolver().add_server(&ns_);
  }

  WireReply exchange(const std::vector<std::uint8_t>& query_wire, Transport transport) override {
    client_.clear();
    client_.send_raw(net_, query_wire, transport);
    net_.run_until([&] { return !client_.raw_responses().empty(); }, 200000);
    WireReply rep;
    if (!client_.raw_responses().empty()) {
      rep.replied = true;
      rep.raw = client_.raw_responses().back();
    }
    return rep;
  }

  bool tap_available() const override { return true; }

  std::vector<TapObservation> drain_tap() override {
    const auto& all = upstream_.taps();
    std::vector<TapObservation> fresh(all.begin() + static_cast<std::ptrdiff_t>(tap_cursor_),
                                      all.end());
    tap_cursor_ = all.size();
    return fresh;
  }

  bool reboot_available() const override { return true; }

  bool reboot() override {
    ++reboots_;
    fwd_.reboot(net_, kFirstBoot + reboots_ * 3613);
    return true;
  }

  ForwarderNode& forwarder_node() { return fwd_; }
  SimNetwork& net() { return net_; }

private:
  static constexpr std::uint32_t kFirstBoot = 100000;

  LabNames names_;
  LabTopology topo_;
  SimNetwork net_;
  AttackerNameserver ns_;
  RecursiveNode upstream_;
  ForwarderNode fwd_;
  ClientNode client_;
  std::size_t tap_cursor_ = 0;
  std::uint32_t reboots_ = 0;
};

/// Convenience wrapper: scan a simulated device built from `profile`.
inline ScanReport scan_simulated_profile(const ForwarderProfile& profile, std::uint64_t seed,
                                         ScanOptions opt = {}) {
  SimScanTransport io(profile, seed);
  if (opt.target_label == "device-under-test") opt.target_label = profile.name;
  Scanner scanner(io, std::move(opt));
  return scanner.run();
}

// ---------------------------------------------------------------------------
// A-record TTL survey over a list of domains.
//
// Asks the given transport for each name's A record and buckets the answer's
// TTL. Short lifetimes matter operationally: a poisoned entry that a victim
// cache pins for minutes outlives many legitimate records, and a re-poisoning
// attacker needs to win the race only once per expiry.
// ---------------------------------------------------------------------------

struct TtlHistogram {
  std::size_t le60 = 0;     // TTL <= 60 s
  std::size_t le300 = 0;    // 60 < TTL <= 300 s
  std::size_t gt300 = 0;    // TTL > 300 s
  std::size_t failures = 0; // no reply, unparseable, error rcode, or no A record

  // (domain, observed TTL) per input name; nullopt marks a failure.
  std::vector<std::pair<std::string, std::optional<std::uint32_t>>> samples;

  std::size_t total() const { return le60 + le300 + gt300 + failures; }
};

/// Query each name for its A record through `io` and bucket the TTLs.
/// Every input name lands in exactly one bucket (failures included), so
/// total() always equals names.size().
inline TtlHistogram ttl_survey(const std::vector<DnsName>& names, ScanTransport& io,
                               std::uint64_t seed = 1) {
  TtlHistogram hist;
  SeededRng rng(seed ^ 0x771CAFE);
  for (const DnsName& name : names) {
    std::optional<std::uint32_t> ttl;
    WireReply rep = io.exchange(serialize_message(make_query(rng.txid(), name, RrType::A)),
                                Transport::udp);
    if (rep.replied) {
      if (ParseResult r = parse_message(rep.raw); r.ok() && r.message.flags.rcode == kRcodeNoError) {
        for (const auto& rr : r.message.answers) {
          if (rr.type == RrType::A) {
            ttl = rr.ttl;
            break;
          }
        }
      }
    }
    if (!ttl)
      ++hist.failures;
    else if (*ttl <= 60)
      ++hist.le60;
    else if (*ttl <= 300)
      ++hist.le300;
    else
      ++hist.gt300;
    hist.samples.push_back({name_to_presentation(name), ttl});
  }
  return hist;
}

/// Transport that aims queries directly at a simulated recursive resolver
/// (no forwarder in between) serving the provided zones. Lets the TTL survey
/// run against a synthetic root of authority.
class DirectResolverTransport : public ScanTransport {
public:
  explicit DirectResolverTransport(std::vector<ZoneScript> zones, RecursiveConfig cfg = {})
      : upstream_(net_, topo_.upstream, cfg),
        client_(net_, topo_.scanner, topo_.upstream) {
    for (auto& z : zones) ns_.add_zone(std::move(z));
    upstream_.resolver().add_server(&ns_);
  }

  WireReply exchange(const std::vector<std::uint8_t>& query_wire, Transport transport) override {
    client_.clear();
    client_.send_raw(net_, query_wire, transport);
    net_.run_until([&] { return !client_.raw_responses().empty(); }, 200000);
    WireReply rep;
    if (!client_.raw_responses().empty()) {
      rep.replied = true;
      rep.raw = client_.raw_responses().back();
    }
    return rep;
  }

  bool tap_available() const override { return false; }
  std::vector<TapObservation> drain_tap() override { return {}; }
  bool reboot_available() const override { return false; }
  bool reboot() override { return false; }

private:
  LabTopology topo_;
  SimNetwork net_;
  AttackerNameserver ns_;
  RecursiveNode upstream_;
  ClientNode client_;
};

}  // namespace dnslab
