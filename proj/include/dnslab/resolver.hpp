#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnslab/message.hpp"
#include "dnslab/name.hpp"
#include "dnslab/zone.hpp"

namespace dnslab {

/// One upstream-visible query, as recorded by a measurement tap sitting in
/// front of the recursive resolver.
struct TapObservation {
  std::uint64_t time_ms = 0;
  std::uint16_t txid = 0;
  std::uint16_t src_port = 0;
  DnsName qname;
  RrType qtype = RrType::A;
  bool cd = false;
};

struct RecursiveConfig {
  bool validate = true;        // reject answers carrying an invalid stamp
  bool honor_cd = true;        // CD=1 disables that check for the query
  bool negative_cache = true;  // cache empty answers per SOA minimum
  int max_chain_depth = 8;
};

/// Synchronous recursive resolver over scripted authoritative servers. It
/// follows alias chains hop by hop, caches per record TTL, negative-caches
/// per SOA minimum, and enforces a structural bailiwick: only records whose
/// owner is the current chain name are accepted.
class RecursiveResolver {
public:
  explicit RecursiveResolver(RecursiveConfig cfg = {}) : cfg_(cfg) {}

  void add_server(AttackerNameserver* server) { servers_.push_back(server); }

  /// Applied to every authoritative response before validation; models an
  /// on-path adversary between this resolver and the nameservers.
  void set_tamper(std::function<void(DnsMessage&)> hook) { tamper_ = std::move(hook); }

  struct CacheEntry {
    std::vector<ResourceRecord> records;
    std::uint64_t stored_ms = 0;
  };
  struct NegativeEntry {
    ResourceRecord soa;
    std::uint8_t rcode = kRcodeNoError;
    std::uint32_t ttl_s = 0;
    std::uint64_t stored_ms = 0;
  };
  using CacheKey = std::pair<std::string, std::uint16_t>;

  static std::string canonical_name(const DnsName& n) {
    return ascii_lower(name_to_presentation(n));
  }
  static CacheKey cache_key(const DnsName& n, RrType t) {
    return {canonical_name(n), static_cast<std::uint16_t>(t)};
  }

  const std::map<CacheKey, CacheEntry>& cache() const { return cache_; }
  const std::map<CacheKey, NegativeEntry>& negative_cache() const { return negatives_; }
  void clear_cache() {
    cache_.clear();
    negatives_.clear();
  }

  DnsMessage handle_query(const DnsMessage& query, std::uint64_t now_ms) {
    DnsMessage resp;
    resp.txid = query.txid;
    resp.flags.qr = true;
    resp.flags.ra = true;
    resp.flags.rd = query.flags.rd;
    resp.flags.cd = query.flags.cd;
    if (query.questions.size() != 1) {
      resp.flags.rcode = kRcodeFormErr;
      return resp;
    }
    const Question& q = query.questions[0];
    resp.questions = query.questions;
    if (q.cls != RrClass::IN) {
      resp.flags.rcode = kRcodeRefused;
      return resp;
    }

    // CD=1 asks us to skip validation; answers produced that way are relayed
    // but never enter this cache.
    bool skipped_validation = cfg_.validate && cfg_.honor_cd && query.flags.cd;
    bool check = cfg_.validate && !skipped_validation;
    bool cache_ok = !skipped_validation;

    DnsName cur = q.name;
    for (int depth = 0; depth <= cfg_.max_chain_depth; ++depth) {
      // Cache: exact type first, then a cached alias to follow.
      if (auto hit = fresh(cur, q.type, now_ms)) {
        append_with_remaining_ttl(resp.answers, *hit, now_ms);
        return resp;
      }
      if (q.type != RrType::CNAME) {
        if (auto hit = fresh(cur, RrType::CNAME, now_ms)) {
          append_with_remaining_ttl(resp.answers, *hit, now_ms);
          cur = std::get<NameRdata>(hit->records.front().rdata).target;
          continue;
        }
      }
      if (auto neg = fresh_negative(cur, q.type, now_ms)) {
        resp.flags.rcode = neg->rcode;
        ResourceRecord soa = neg->soa;
        std::uint32_t age = static_cast<std::uint32_t>((now_ms - neg->stored_ms) / 1000);
        soa.ttl = neg->ttl_s - age;
        resp.authority.push_back(soa);
        return resp;
      }

      AttackerNameserver* server = server_for(cur);
      if (!server) {
        resp.flags.rcode = resp.answers.empty() ? kRcodeRefused : kRcodeServFail;
        return resp;
      }
      DnsMessage up = make_query(0, cur, q.type, RrClass::IN, /*rd=*/false, query.flags.cd);
      DnsMessage answer = server->handle_query(up);
      if (tamper_) tamper_(answer);

      if (check && has_invalid_stamp(answer)) {
        resp.answers.clear();
        resp.authority.clear();
        resp.flags.rcode = kRcodeServFail;
        return resp;
      }

      // Bailiwick: only records owned by the name we asked about count.
      std::vector<ResourceRecord> typed, alias;
      for (const auto& rr : answer.answers) {
        if (rr.type == RrType::VSTAMP) continue;
        if (!names_equal_ci(rr.name, cur)) continue;
        if (rr.type == q.type) typed.push_back(rr);
        else if (rr.type == RrType::CNAME) alias.push_back(rr);
      }

      if (!typed.empty()) {
        for (const auto& rr : typed) resp.answers.push_back(rr);
        if (cache_ok) store(cur, q.type, typed, now_ms);
        return resp;
      }
      if (!alias.empty() && q.type != RrType::CNAME) {
        resp.answers.push_back(alias.front());
        if (cache_ok) store(cur, RrType::CNAME, {alias.front()}, now_ms);
        cur = std::get<NameRdata>(alias.front().rdata).target;
        continue;
      }

      // Terminal: no usable records. Relay the authority section and
      // negative-cache per the SOA minimum.
      resp.flags.rcode = answer.flags.rcode;
      for (const auto& rr : answer.authority) resp.authority.push_back(rr);
      if (cfg_.negative_cache && cache_ok &&
          (answer.flags.rcode == kRcodeNoError || answer.flags.rcode == kRcodeNxDomain)) {
        for (const auto& rr : answer.authority) {
          if (rr.type != RrType::SOA) continue;
          const auto& soa = std::get<SoaRdata>(rr.rdata);
          std::uint32_t neg_ttl = std::min(rr.ttl, soa.minimum);
          if (neg_ttl > 0)
            negatives_[cache_key(cur, q.type)] =
                NegativeEntry{rr, answer.flags.rcode, neg_ttl, now_ms};
          break;
        }
      }
      return resp;
    }
    resp.answers.clear();
    resp.flags.rcode = kRcodeServFail;
    return resp;
  }

private:
  AttackerNameserver* server_for(const DnsName& qname) const {
    AttackerNameserver* best = nullptr;
    std::size_t best_depth = 0;
    for (auto* s : servers_) {
      if (const ZoneScript* z = s->find_zone(qname)) {
        if (!best || z->apex.labels.size() > best_depth) {
          best = s;
          best_depth = z->apex.labels.size();
        }
      }
    }
    return best;
  }

  static bool has_invalid_stamp(const DnsMessage& m) {
    for (const auto& rr : m.answers)
      if (rr.type == RrType::VSTAMP && !std::get<VstampRdata>(rr.rdata).valid) return true;
    for (const auto& rr : m.authority)
      if (rr.type == RrType::VSTAMP && !std::get<VstampRdata>(rr.rdata).valid) return true;
    return false;
  }

  std::optional<CacheEntry> fresh(const DnsName& n, RrType t, std::uint64_t now_ms) {
    auto it = cache_.find(cache_key(n, t));
    if (it == cache_.end()) return std::nullopt;
    for (const auto& rr : it->second.records) {
      if (it->second.stored_ms + static_cast<std::uint64_t>(rr.ttl) * 1000 <= now_ms) {
        cache_.erase(it);
        return std::nullopt;
      }
    }
    return it->second;
  }

  std::optional<NegativeEntry> fresh_negative(const DnsName& n, RrType t, std::uint64_t now_ms) {
    auto it = negatives_.find(cache_key(n, t));
    if (it == negatives_.end()) return std::nullopt;
    if (it->second.stored_ms + static_cast<std::uint64_t>(it->second.ttl_s) * 1000 <= now_ms) {
      negatives_.erase(it);
      return std::nullopt;
    }
    return it->second;
  }

  void append_with_remaining_ttl(std::vector<ResourceRecord>& out, const CacheEntry& e,
                                 std::uint64_t now_ms) const {
    std::uint32_t age = static_cast<std::uint32_t>((now_ms - e.stored_ms) / 1000);
    for (ResourceRecord rr : e.records) {
      rr.ttl = rr.ttl > age ? rr.ttl - age : 0;
      out.push_back(std::move(rr));
    }
  }

  void store(const DnsName& n, RrType t, const std::vector<ResourceRecord>& rrs,
             std::uint64_t now_ms) {
    std::vector<ResourceRecord> keep;
    for (const auto& rr : rrs)
      if (rr.ttl > 0) keep.push_back(rr);
    if (keep.empty()) return;
    cache_[cache_key(n, t)] = CacheEntry{std::move(keep), now_ms};
  }

  RecursiveConfig cfg_;
  std::vector<AttackerNameserver*> servers_;
  std::function<void(DnsMessage&)> tamper_;
  std::map<CacheKey, CacheEntry> cache_;
  std::map<CacheKey, NegativeEntry> negatives_;
};

// ---------------------------------------------------------------------------
// Stub-side lookup interpretation
// ---------------------------------------------------------------------------

struct StubConfig {
  bool chase_incomplete_cname = true;  // re-query a dangling alias target
  int max_chase_depth = 4;
  std::uint64_t timeout_ms = 2000;
  int retransmits = 1;
};

enum class StubStatus {
  ok,
  timeout,
  no_address,
  chase_depth_exceeded,
  rejected_input,  // initial lookup names may not contain raw dots/zero bytes
};

inline const char* to_string(StubStatus s) {
  switch (s) {
    case StubStatus::ok: return "ok";
    case StubStatus::timeout: return "timeout";
    case StubStatus::no_address: return "no_address";
    case StubStatus::chase_depth_exceeded: return "chase_depth_exceeded";
    case StubStatus::rejected_input: return "rejected_input";
  }
  return "?";
}

struct StubResult {
  StubStatus status = StubStatus::timeout;
  std::optional<std::uint32_t> addr;
  DnsName final_name;  // name the address was (or would have been) found at
  int queries_sent = 0;
};

/// What a stub does with one response during a lookup for `cur`: take an
/// address, chase a dangling alias, or give up.
struct StubDecision {
  enum Kind { take_address, chase, give_up } kind = give_up;
  std::uint32_t addr = 0;
  DnsName next;
};

inline StubDecision stub_interpret(const DnsMessage& resp, const DnsName& cur,
                                   bool chase_enabled) {
  DnsName terminal = cur;
  if (auto t = last_cname_target(resp, cur)) terminal = *t;
  for (const auto& rr : resp.answers) {
    if (rr.type != RrType::A) continue;
    if (names_equal_ci(rr.name, terminal) || names_equal_ci(rr.name, cur))
      return {StubDecision::take_address, std::get<ARdata>(rr.rdata).addr, {}};
  }
  if (chase_enabled && !names_equal_ci(terminal, cur))
    return {StubDecision::chase, 0, terminal};
  return {StubDecision::give_up, 0, {}};
}

}  // namespace dnslab
