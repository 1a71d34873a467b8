#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dnslab/endpoint.hpp"
#include "dnslab/message.hpp"
#include "dnslab/name.hpp"
#include "dnslab/profile.hpp"
#include "dnslab/rng.hpp"

namespace dnslab {

constexpr std::uint16_t kEphemeralLo = 1024;
constexpr std::uint16_t kEphemeralHi = 65535;

/// Port choice of a daemon that seeds libc rand() with the boot-time clock:
/// one multiplicative-LCG step, folded into the ephemeral range. A device
/// whose clock resets at every boot reproduces the same port forever.
inline std::uint16_t boot_time_port(std::uint32_t boot_unix_seconds) {
  std::uint64_t x1 = (16807ull * (static_cast<std::uint64_t>(boot_unix_seconds) + 1)) % 2147483647ull;
  return static_cast<std::uint16_t>(49152 + (x1 % 16384));
}

struct CachedRecordSet {
  std::vector<ResourceRecord> records;
  std::uint64_t stored_ms = 0;
};

struct NegativeEntry {
  ResourceRecord soa;
  std::uint64_t stored_ms = 0;
  std::uint32_t ttl_s = 0;
};

/// The three cache architectures under study plus "no cache". The two map
/// models key on the naively flattened qname, which is what makes
/// special-character injection rewrite a different name than the one queried.
struct CacheState {
  std::map<std::string, std::uint32_t> addr_map;                  // flattened qname -> A rdata
  std::map<std::string, std::vector<std::uint8_t>> packet_map;    // flattened qname -> raw packet
  std::map<std::pair<std::string, std::uint16_t>, CachedRecordSet> records;
  std::map<std::pair<std::string, std::uint16_t>, NegativeEntry> negatives;

  void clear() {
    addr_map.clear();
    packet_map.clear();
    records.clear();
    negatives.clear();
  }
  std::size_t size() const {
    return addr_map.size() + packet_map.size() + records.size() + negatives.size();
  }
};

struct PendingQuery {
  Endpoint client;
  Transport transport = Transport::udp;
  std::uint16_t client_txid = 0;
  bool client_cd = false;
  bool client_had_opt = false;
  Question question;         // strict labels as received
  std::string cache_key;     // per-profile decoder
  std::uint16_t upstream_txid = 0;
  std::uint16_t upstream_port = 0;
  std::uint64_t sent_ms = 0;
};

struct ForwarderStats {
  std::uint64_t client_queries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t forwards = 0;
  std::uint64_t responses_accepted = 0;
  std::uint64_t responses_rejected = 0;  // wrong source, port, or txid
  std::uint64_t formerr = 0;
  std::uint64_t tcp_dropped = 0;
};

struct SendToClient {
  Endpoint client;
  Transport transport = Transport::udp;
  std::vector<std::uint8_t> bytes;
};
struct SendUpstream {
  std::uint16_t src_port = 0;
  std::vector<std::uint8_t> bytes;
};
struct PortClosed {
  std::uint16_t port = 0;
};
struct Drop {
  std::string reason;
};
using ForwarderAction = std::variant<SendToClient, SendUpstream, PortClosed, Drop>;

namespace detail {

inline void patch_txid(std::vector<std::uint8_t>& bytes, std::uint16_t txid) {
  bytes[0] = static_cast<std::uint8_t>(txid >> 8);
  bytes[1] = static_cast<std::uint8_t>(txid & 0xFF);
}

inline void clear_cd_ad_bits(std::vector<std::uint8_t>& bytes) {
  bytes[3] &= static_cast<std::uint8_t>(~0x30);  // AD=0x20, CD=0x10 in the low flag octet
}

inline bool has_opt(const DnsMessage& m) {
  for (const auto& rr : m.additional)
    if (rr.type == RrType::OPT) return true;
  return false;
}

}  // namespace detail

/// Transport-agnostic forwarder state machine. Callers feed it raw packets
/// plus arrival metadata and execute the returned actions; the same core
/// drives both the simulated network and the live UDP/TCP endpoints.
class Forwarder {
public:
  Forwarder(ForwarderProfile profile, std::uint64_t seed, Endpoint upstream,
            std::uint32_t boot_unix_seconds = 0, std::uint64_t now_ms = 0)
      : profile_(std::move(profile)), rng_(seed), upstream_(upstream) {
    profile_.validate();
    next_sequential_txid_ = profile_.txid_start;
    choose_boot_port(boot_unix_seconds);
    (void)now_ms;
  }

  const ForwarderProfile& profile() const { return profile_; }
  const CacheState& cache() const { return cache_; }
  const ForwarderStats& stats() const { return stats_; }
  Endpoint upstream() const { return upstream_; }

  /// Ports the upstream-facing side currently listens on.
  std::set<std::uint16_t> open_ports() const {
    std::set<std::uint16_t> out;
    if (boot_port_) out.insert(*boot_port_);
    for (const auto& [key, _] : pending_) out.insert(key.second);
    return out;
  }
  std::optional<std::uint16_t> boot_port() const { return boot_port_; }

  /// Stand-in for an attacker's fingerprint of the device: the port the next
  /// forwarded query will leave from, when the policy makes that knowable.
  std::optional<std::uint16_t> predictable_port() const {
    return boot_port_;
  }

  /// Power cycle: caches dropped, in-flight queries dropped, boot-time
  /// policies re-evaluated against the new clock. A static port never moves.
  void reboot(std::uint32_t boot_unix_seconds, std::uint64_t now_ms = 0) {
    (void)now_ms;
    cache_.clear();
    pending_.clear();
    next_sequential_txid_ = profile_.txid_start;
    choose_boot_port(boot_unix_seconds);
  }

  std::vector<ForwarderAction> handle_client_query(Endpoint client, Transport transport,
                                                   std::vector<std::uint8_t> bytes,
                                                   std::uint64_t now_ms) {
    ++stats_.client_queries;
    if (transport == Transport::tcp && !profile_.tcp_supported) {
      ++stats_.tcp_dropped;
      return {Drop{"tcp not supported"}};
    }
    ParseResult parsed = parse_message(bytes);
    if (!parsed.ok() || parsed.message.flags.qr || parsed.message.questions.size() != 1) {
      ++stats_.formerr;
      if (bytes.size() < 2) return {Drop{"unparseable query"}};
      DnsMessage err;
      err.txid = parsed.message.txid;
      err.flags.qr = true;
      err.flags.rcode = kRcodeFormErr;
      err.questions = parsed.message.questions;
      return {SendToClient{client, transport, serialize_message(err)}};
    }
    const DnsMessage& query = parsed.message;
    const Question& q = query.questions[0];

    if (q.type == RrType::TXT && q.cls == RrClass::CHAOS) {
      if (!profile_.version_bind.empty() && names_equal_ci(q.name, name_of("version.bind"))) {
        DnsMessage resp;
        resp.txid = query.txid;
        resp.flags.qr = true;
        resp.flags.aa = true;
        resp.questions = query.questions;
        resp.answers.push_back({q.name, RrType::TXT, RrClass::CHAOS, 0,
                                TxtRdata{{profile_.version_bind}}});
        return {SendToClient{client, transport, serialize_message(resp)}};
      }
      // No banner configured: falls through and is forwarded like any query.
    }

    std::string key = cache_key(q.name);
    if (auto hit = lookup_cache(query, q, key, now_ms); hit) {
      ++stats_.cache_hits;
      maybe_break_edns(*hit, detail::has_opt(query));
      return {SendToClient{client, transport, std::move(*hit)}};
    }
    return forward_upstream(client, transport, std::move(bytes), query, q, std::move(key), now_ms);
  }

  std::vector<ForwarderAction> handle_upstream_response(Endpoint src, std::uint16_t dst_port,
                                                        std::vector<std::uint8_t> bytes,
                                                        std::uint64_t now_ms) {
    if (bytes.size() < 2) return {Drop{"runt packet"}};
    if (src.addr != upstream_.addr) {
      ++stats_.responses_rejected;
      return {Drop{"response from unexpected source"}};
    }
    std::uint16_t txid = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
    auto it = pending_.find({txid, dst_port});
    if (it == pending_.end()) {
      ++stats_.responses_rejected;
      return {Drop{"no matching pending query"}};
    }
    PendingQuery pending = std::move(it->second);
    pending_.erase(it);
    ++stats_.responses_accepted;

    ParseResult parsed = parse_message(bytes);
    bool skip_cache = profile_.cd_policy == CdPolicy::forward_no_cache && pending.client_cd;
    if (parsed.ok() && !skip_cache) store_cache(parsed.message, pending, now_ms);

    std::vector<std::uint8_t> relay = std::move(bytes);
    detail::patch_txid(relay, pending.client_txid);
    maybe_break_edns(relay, pending.client_had_opt);
    std::vector<ForwarderAction> actions;
    if (profile_.port_policy == PortPolicy::random_per_query)
      actions.push_back(PortClosed{pending.upstream_port});
    actions.push_back(SendToClient{pending.client, pending.transport, std::move(relay)});
    return actions;
  }

private:
  void choose_boot_port(std::uint32_t boot_unix_seconds) {
    switch (profile_.port_policy) {
      case PortPolicy::random_per_query:
        boot_port_.reset();
        break;
      case PortPolicy::random_at_boot:
        boot_port_ = static_cast<std::uint16_t>(rng_.uniform(kEphemeralLo, kEphemeralHi));
        break;
      case PortPolicy::static_port:
        boot_port_ = profile_.static_port;
        break;
      case PortPolicy::time_seeded_at_boot: {
        std::uint32_t seed = profile_.clock_resets_on_boot
                                 ? profile_.daemon_start_delay
                                 : boot_unix_seconds + profile_.daemon_start_delay;
        boot_port_ = boot_time_port(seed);
        break;
      }
    }
  }

  std::string cache_key(const DnsName& n) const {
    if (profile_.decoder == Decoder::naive) return ascii_lower(name_to_naive_string(n));
    return ascii_lower(name_to_presentation(n));
  }

  std::uint16_t select_txid(std::uint16_t client_txid) {
    switch (profile_.txid_policy) {
      case TxidPolicy::fresh_random: return rng_.txid();
      case TxidPolicy::forward_client: return client_txid;
      case TxidPolicy::sequential: {
        std::uint16_t t = next_sequential_txid_;
        next_sequential_txid_ = static_cast<std::uint16_t>(next_sequential_txid_ + 1);
        return t;
      }
    }
    return 0;
  }

  std::uint16_t select_port() {
    if (boot_port_) return *boot_port_;
    for (int i = 0; i < 64; ++i) {
      std::uint16_t p = static_cast<std::uint16_t>(rng_.uniform(kEphemeralLo, kEphemeralHi));
      bool in_use = false;
      for (const auto& [key, _] : pending_)
        if (key.second == p) in_use = true;
      if (!in_use) return p;
    }
    return kEphemeralHi;  // pathological load; deterministic fallback
  }

  std::optional<std::vector<std::uint8_t>> lookup_cache(const DnsMessage& query, const Question& q,
                                                        const std::string& key,
                                                        std::uint64_t now_ms) {
    switch (profile_.cache_model) {
      case CacheModel::none:
        return std::nullopt;
      case CacheModel::qname_addr_map: {
        if (q.type != RrType::A || q.cls != RrClass::IN) return std::nullopt;
        auto it = cache_.addr_map.find(key);
        if (it == cache_.addr_map.end()) return std::nullopt;
        // Synthesized answer: the stored mapping with a fixed TTL, never
        // decremented, under the name the client just asked for.
        DnsMessage resp;
        resp.txid = query.txid;
        resp.flags.qr = true;
        resp.flags.rd = query.flags.rd;
        resp.flags.ra = true;
        resp.questions = query.questions;
        resp.answers.push_back({q.name, RrType::A, RrClass::IN, 60, ARdata{it->second}});
        return serialize_message(resp);
      }
      case CacheModel::qname_packet_map: {
        auto it = cache_.packet_map.find(key);
        if (it == cache_.packet_map.end()) return std::nullopt;
        // Replay of the stored packet with only the TXID rewritten: flags,
        // question section, and TTLs all come from the cached response.
        std::vector<std::uint8_t> replay = it->second;
        detail::patch_txid(replay, query.txid);
        return replay;
      }
      case CacheModel::record_cache:
        return lookup_record_cache(query, q, key, now_ms);
    }
    return std::nullopt;
  }

  std::optional<std::vector<std::uint8_t>> lookup_record_cache(const DnsMessage& query,
                                                               const Question& q,
                                                               const std::string& key,
                                                               std::uint64_t now_ms) {
    if (q.cls != RrClass::IN) return std::nullopt;
    if (auto neg = cache_.negatives.find({key, static_cast<std::uint16_t>(q.type)});
        neg != cache_.negatives.end()) {
      if (expired(neg->second.stored_ms, neg->second.ttl_s, now_ms)) {
        cache_.negatives.erase(neg);
      } else {
        DnsMessage resp;
        resp.txid = query.txid;
        resp.flags.qr = true;
        resp.flags.rd = query.flags.rd;
        resp.flags.ra = true;
        resp.questions = query.questions;
        resp.authority.push_back(neg->second.soa);
        return serialize_message(resp);
      }
    }
    std::vector<ResourceRecord> chain;
    std::string cur = key;
    DnsName cur_name = q.name;
    for (int depth = 0; depth < 9; ++depth) {
      if (auto it = fresh_records(cur, q.type, now_ms); it) {
        append_with_remaining_ttl(chain, *it, now_ms);
        return build_record_response(query, q, chain, now_ms);
      }
      if (q.type != RrType::A && q.type != RrType::AAAA) break;
      auto cn = fresh_records(cur, RrType::CNAME, now_ms);
      if (!cn) break;
      append_with_remaining_ttl(chain, *cn, now_ms);
      const auto* target = std::get_if<NameRdata>(&cn->records.front().rdata);
      if (!target) break;
      cur_name = target->target;
      cur = cache_key(cur_name);
    }
    return std::nullopt;  // no full answer in cache: forward instead
  }

  std::optional<CachedRecordSet> fresh_records(const std::string& key, RrType type,
                                               std::uint64_t now_ms) {
    auto it = cache_.records.find({key, static_cast<std::uint16_t>(type)});
    if (it == cache_.records.end()) return std::nullopt;
    const CachedRecordSet& set = it->second;
    for (const auto& rr : set.records)
      if (expired(set.stored_ms, rr.ttl, now_ms)) {
        cache_.records.erase(it);
        return std::nullopt;
      }
    return set;
  }

  static bool expired(std::uint64_t stored_ms, std::uint32_t ttl_s, std::uint64_t now_ms) {
    return now_ms >= stored_ms + static_cast<std::uint64_t>(ttl_s) * 1000;
  }

  void append_with_remaining_ttl(std::vector<ResourceRecord>& out, const CachedRecordSet& set,
                                 std::uint64_t now_ms) {
    for (ResourceRecord rr : set.records) {
      std::uint64_t elapsed_s = (now_ms - set.stored_ms) / 1000;
      rr.ttl = elapsed_s >= rr.ttl ? 0 : rr.ttl - static_cast<std::uint32_t>(elapsed_s);
      out.push_back(std::move(rr));
    }
  }

  std::vector<std::uint8_t> build_record_response(const DnsMessage& query, const Question& q,
                                                  std::vector<ResourceRecord> chain,
                                                  std::uint64_t) {
    DnsMessage resp;
    resp.txid = query.txid;
    resp.flags.qr = true;
    resp.flags.rd = query.flags.rd;
    resp.flags.ra = true;
    resp.questions = query.questions;
    if (profile_.cname_merge && chain.size() > 1) {
      // Merged form: one synthesized address record under the queried name.
      for (const auto& rr : chain) {
        if (rr.type != q.type) continue;
        resp.answers.push_back({q.name, rr.type, rr.cls, rr.ttl, rr.rdata});
      }
      if (!resp.answers.empty()) return serialize_message(resp);
    }
    resp.answers = std::move(chain);
    return serialize_message(resp);
  }

  std::vector<ForwarderAction> forward_upstream(Endpoint client, Transport transport,
                                                std::vector<std::uint8_t> raw,
                                                const DnsMessage& query, const Question& q,
                                                std::string key, std::uint64_t now_ms) {
    PendingQuery pending;
    pending.client = client;
    pending.transport = transport;
    pending.client_txid = query.txid;
    pending.client_cd = query.flags.cd;
    pending.client_had_opt = detail::has_opt(query);
    pending.question = q;
    pending.cache_key = key;
    pending.upstream_txid = select_txid(query.txid);
    pending.upstream_port = select_port();
    pending.sent_ms = now_ms;

    std::vector<std::uint8_t> out;
    if (profile_.cache_model == CacheModel::record_cache) {
      // Full-parser firmware: the query is decoded and re-encoded, so a
      // naive decoder rewrites special-character names before they ever
      // reach the upstream resolver.
      DnsName qname = q.name;
      if (profile_.decoder == Decoder::naive)
        qname = name_from_naive_string(name_to_naive_string(qname));
      DnsMessage up;
      up.txid = pending.upstream_txid;
      up.flags.rd = true;
      up.flags.cd = profile_.cd_policy == CdPolicy::clear_flag ? false : query.flags.cd;
      up.questions.push_back({qname, q.type, q.cls});
      if (profile_.edns_behavior != EdnsBehavior::strip)
        for (const auto& rr : query.additional)
          if (rr.type == RrType::OPT) up.additional.push_back(rr);
      out = serialize_message(up);
    } else {
      // Proxy-style firmware: the client's packet goes out unchanged except
      // for surgical header patches.
      out = std::move(raw);
      detail::patch_txid(out, pending.upstream_txid);
      if (profile_.cd_policy == CdPolicy::clear_flag) detail::clear_cd_ad_bits(out);
      if (profile_.edns_behavior == EdnsBehavior::strip && pending.client_had_opt) {
        DnsMessage stripped = query;
        std::erase_if(stripped.additional,
                      [](const ResourceRecord& rr) { return rr.type == RrType::OPT; });
        stripped.txid = pending.upstream_txid;
        if (profile_.cd_policy == CdPolicy::clear_flag) {
          stripped.flags.cd = false;
          stripped.flags.ad = false;
        }
        out = serialize_message(stripped);
      }
    }

    ++stats_.forwards;
    pending_[{pending.upstream_txid, pending.upstream_port}] = pending;
    return {SendUpstream{pending.upstream_port, std::move(out)}};
  }

  void store_cache(const DnsMessage& resp, const PendingQuery& pending, std::uint64_t now_ms) {
    switch (profile_.cache_model) {
      case CacheModel::none:
        return;
      case CacheModel::qname_addr_map: {
        if (resp.questions.empty()) return;
        // Keyed on the *response's* question, flattened: a response whose
        // question name embeds 0x00 or 0x2E poisons the flattened name.
        std::string key = cache_key(resp.questions[0].name);
        if (auto a = first_a_rdata(resp)) cache_.addr_map[key] = *a;
        return;
      }
      case CacheModel::qname_packet_map: {
        if (resp.questions.empty()) return;
        std::string key = cache_key(resp.questions[0].name);
        cache_.packet_map[key] = serialize_message(resp);
        return;
      }
      case CacheModel::record_cache: {
        if (resp.flags.rcode == kRcodeNoError && !resp.answers.empty()) {
          std::map<std::pair<std::string, std::uint16_t>, CachedRecordSet> fresh;
          for (const auto& rr : resp.answers) {
            if (rr.cls != RrClass::IN) continue;
            if (rr.type != RrType::A && rr.type != RrType::AAAA && rr.type != RrType::CNAME &&
                rr.type != RrType::TXT)
              continue;
            if (rr.ttl == 0) continue;  // not cacheable
            auto& set = fresh[{cache_key(rr.name), static_cast<std::uint16_t>(rr.type)}];
            set.stored_ms = now_ms;
            set.records.push_back(rr);
          }
          for (auto& [k, v] : fresh) cache_.records[k] = std::move(v);
        } else if (resp.answers.empty() &&
                   (resp.flags.rcode == kRcodeNoError || resp.flags.rcode == kRcodeNxDomain)) {
          for (const auto& rr : resp.authority) {
            if (rr.type != RrType::SOA) continue;
            const auto* soa = std::get_if<SoaRdata>(&rr.rdata);
            if (!soa || soa->minimum == 0) break;  // TTL 0: not cached
            NegativeEntry neg;
            neg.soa = rr;
            neg.stored_ms = now_ms;
            neg.ttl_s = soa->minimum;
            cache_.negatives[{pending.cache_key, static_cast<std::uint16_t>(pending.question.type)}] = neg;
            break;
          }
        }
        return;
      }
    }
  }

  void maybe_break_edns(std::vector<std::uint8_t>& resp, bool client_had_opt) {
    if (profile_.edns_behavior != EdnsBehavior::break_response || !client_had_opt) return;
    if (resp.size() < 12) return;
    // Header claims one more answer than the body carries: observers see a
    // count/body mismatch, the classic shape of firmware EDNS breakage.
    std::uint16_t an = static_cast<std::uint16_t>((resp[6] << 8) | resp[7]);
    ++an;
    resp[6] = static_cast<std::uint8_t>(an >> 8);
    resp[7] = static_cast<std::uint8_t>(an & 0xFF);
  }

  ForwarderProfile profile_;
  SeededRng rng_;
  Endpoint upstream_;
  CacheState cache_;
  ForwarderStats stats_;
  std::map<std::pair<std::uint16_t, std::uint16_t>, PendingQuery> pending_;  // (txid, port)
  std::optional<std::uint16_t> boot_port_;
  std::uint16_t next_sequential_txid_ = 1;
};

/// Port-mapping middlebox: DNS payloads pass through byte-identical in both
/// directions; only the IP/UDP envelope is rewritten. Nothing is cached, so
/// there is nothing to poison on the box itself.
class NatForwarder {
public:
  NatForwarder(Endpoint upstream, std::uint16_t first_nat_port = 30000)
      : upstream_(upstream), next_port_(first_nat_port) {}

  Endpoint upstream() const { return upstream_; }

  struct NatSend {
    std::uint16_t src_port = 0;
    std::vector<std::uint8_t> bytes;
  };

  NatSend forward_client_packet(Endpoint client, std::vector<std::uint8_t> bytes) {
    std::uint16_t port = 0;
    for (const auto& [p, c] : port_map_)
      if (c == client) port = p;
    if (port == 0) {
      port = next_port_++;
      port_map_[port] = client;
    }
    return {port, std::move(bytes)};  // payload untouched
  }

  std::optional<SendToClient> forward_upstream_packet(std::uint16_t nat_port,
                                                      std::vector<std::uint8_t> bytes) {
    auto it = port_map_.find(nat_port);
    if (it == port_map_.end()) return std::nullopt;
    return SendToClient{it->second, Transport::udp, std::move(bytes)};  // payload untouched
  }

  std::set<std::uint16_t> open_ports() const {
    std::set<std::uint16_t> out;
    for (const auto& [p, _] : port_map_) out.insert(p);
    return out;
  }

private:
  Endpoint upstream_;
  std::uint16_t next_port_;
  std::map<std::uint16_t, Endpoint> port_map_;
};

}  // namespace dnslab
