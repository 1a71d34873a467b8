#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnslab/message.hpp"
#include "dnslab/name.hpp"
#include "dnslab/rng.hpp"

namespace dnslab {

class ZoneParseError : public std::runtime_error {
public:
  ZoneParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// One record inside a schedule step. The owner and any name rdata may hold a
/// single "*" label, substituted with the label captured by the entry's
/// wildcard owner pattern when the answer is served.
struct ZoneRecord {
  ResourceRecord record;
  bool valid = true;  // validity bit carried by the zone's stamps when signed
};

struct AnswerStep {
  std::vector<ZoneRecord> answers;
  std::vector<ZoneRecord> authority;
  bool forever = true;
  std::optional<std::uint32_t> soa_minimum;  // synthesize an apex SOA with this minimum
};

/// Scripted entry: answers for one (owner pattern, rrtype), served step by
/// step per arrival count. The last step must repeat forever.
struct ScriptEntry {
  DnsName owner;  // may contain one "*" label
  RrType rrtype = RrType::A;
  std::vector<AnswerStep> schedule;

  bool wildcard() const {
    for (const auto& l : owner.labels)
      if (l == "*") return true;
    return false;
  }
};

struct ZoneScript {
  DnsName apex;
  bool sign = false;
  std::uint32_t soa_minimum = 60;  // default for synthesized negative answers
  std::vector<ScriptEntry> entries;

  void validate() const {
    for (const auto& e : entries) {
      if (e.schedule.empty()) throw std::runtime_error("entry with empty schedule");
      if (!e.schedule.back().forever)
        throw std::runtime_error("schedule must end with a forever step");
      if (!name_ends_with(e.owner, apex))
        throw std::runtime_error("entry owner outside the zone apex");
    }
  }
};

/// Counts arrivals per (concrete queried name, rrtype). Keys are
/// post-capture: two probes with different random prefixes never share a
/// schedule position.
class QueryCounter {
public:
  int next(const DnsName& qname, RrType type) {
    return counts_[{ascii_lower(name_to_presentation(qname)), static_cast<std::uint16_t>(type)}]++;
  }
  int peek(const DnsName& qname, RrType type) const {
    auto it = counts_.find({ascii_lower(name_to_presentation(qname)), static_cast<std::uint16_t>(type)});
    return it == counts_.end() ? 0 : it->second;
  }
  void reset() { counts_.clear(); }

private:
  std::map<std::pair<std::string, std::uint16_t>, int> counts_;
};

/// Matches `name` against an owner pattern; a "*" label captures the
/// corresponding label of `name`.
inline std::optional<std::string> match_owner(const DnsName& pattern, const DnsName& name) {
  if (pattern.labels.size() != name.labels.size()) return std::nullopt;
  std::string captured;
  for (std::size_t i = 0; i < pattern.labels.size(); ++i) {
    if (pattern.labels[i] == "*") {
      captured = name.labels[i];
      continue;
    }
    DnsName a, b;
    a.labels = {pattern.labels[i]};
    b.labels = {name.labels[i]};
    if (!names_equal_ci(a, b)) return std::nullopt;
  }
  return captured;
}

inline DnsName substitute_star(const DnsName& pattern, const std::string& label) {
  DnsName out = pattern;
  for (auto& l : out.labels)
    if (l == "*") l = label;
  return out;
}

/// Twelve lowercase alphanumerics prepended as a fresh leading label; used to
/// defeat caching between repeated probes.
inline DnsName randomized_probe_name(const DnsName& base, SeededRng& rng) {
  static const char cs[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string label;
  for (int i = 0; i < 12; ++i) label.push_back(cs[rng.uniform(0, 35)]);
  DnsName out;
  out.labels.reserve(base.labels.size() + 1);
  out.labels.push_back(std::move(label));
  out.labels.insert(out.labels.end(), base.labels.begin(), base.labels.end());
  if (name_wire_length(out) > kMaxNameWireLen)
    throw WireError(WireErrc::name_too_long, "probe name exceeds 255 octets");
  return out;
}

inline std::string random_probe_label(SeededRng& rng) {
  static const char cs[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string label;
  for (int i = 0; i < 12; ++i) label.push_back(cs[rng.uniform(0, 35)]);
  return label;
}

namespace detail {

inline ResourceRecord make_soa(const DnsName& apex, std::uint32_t minimum) {
  SoaRdata soa;
  soa.mname.labels = {"ns"};
  soa.mname.labels.insert(soa.mname.labels.end(), apex.labels.begin(), apex.labels.end());
  soa.rname.labels = {"hostmaster"};
  soa.rname.labels.insert(soa.rname.labels.end(), apex.labels.begin(), apex.labels.end());
  soa.serial = 1;
  soa.refresh = 3600;
  soa.retry = 600;
  soa.expire = 86400;
  soa.minimum = minimum;
  return ResourceRecord{apex, RrType::SOA, RrClass::IN, minimum, soa};
}

inline ResourceRecord concretize(const ZoneRecord& zr, const std::string& captured) {
  ResourceRecord rr = zr.record;
  rr.name = substitute_star(rr.name, captured);
  if (auto* n = std::get_if<NameRdata>(&rr.rdata)) n->target = substitute_star(n->target, captured);
  return rr;
}

}  // namespace detail

/// Serves one query against one zone. `counters` selects the schedule step by
/// arrival count of the concrete name.
inline DnsMessage authoritative_answer(const ZoneScript& zone, QueryCounter& counters,
                                       const DnsMessage& query) {
  DnsMessage resp;
  resp.flags.qr = true;
  if (query.questions.size() != 1) {
    resp.txid = query.txid;
    resp.flags.rcode = kRcodeFormErr;
    return resp;
  }
  const Question& q = query.questions[0];
  resp.txid = query.txid;
  resp.questions = query.questions;
  resp.flags.cd = query.flags.cd;

  if (!name_ends_with(q.name, zone.apex)) {
    resp.flags.rcode = kRcodeRefused;
    return resp;
  }
  resp.flags.aa = true;

  // Exact entries shadow wildcard ones; an entry of the queried type shadows
  // an alias entry for the same owner.
  const ScriptEntry* chosen = nullptr;
  std::string captured;
  auto consider = [&](const ScriptEntry& e) {
    if (e.rrtype != q.type && e.rrtype != RrType::CNAME) return;
    auto m = match_owner(e.owner, q.name);
    if (!m) return;
    if (!chosen) {
      chosen = &e;
      captured = *m;
      return;
    }
    bool have_exact = !chosen->wildcard();
    bool e_exact = !e.wildcard();
    bool have_typed = chosen->rrtype == q.type;
    bool e_typed = e.rrtype == q.type;
    if ((e_exact && !have_exact) || (e_exact == have_exact && e_typed && !have_typed)) {
      chosen = &e;
      captured = *m;
    }
  };
  for (const auto& e : zone.entries) consider(e);

  if (!chosen) {
    resp.flags.rcode = kRcodeNxDomain;
    resp.authority.push_back(detail::make_soa(zone.apex, zone.soa_minimum));
    return resp;
  }

  int arrival = counters.next(q.name, chosen->rrtype);
  const AnswerStep* step = &chosen->schedule.back();
  int idx = arrival;
  for (const auto& s : chosen->schedule) {
    if (s.forever) {
      step = &s;
      break;
    }
    if (idx == 0) {
      step = &s;
      break;
    }
    --idx;
  }

  for (const auto& zr : step->answers) {
    ResourceRecord rr = detail::concretize(zr, captured);
    resp.answers.push_back(rr);
    if (zone.sign)
      resp.answers.push_back({rr.name, RrType::VSTAMP, RrClass::IN, rr.ttl,
                              VstampRdata{rr.type, zr.valid, zone.apex}});
  }
  for (const auto& zr : step->authority) resp.authority.push_back(detail::concretize(zr, captured));
  if (step->soa_minimum)
    resp.authority.push_back(detail::make_soa(zone.apex, *step->soa_minimum));
  if (resp.answers.empty() && resp.authority.empty())
    resp.authority.push_back(detail::make_soa(zone.apex, zone.soa_minimum));
  return resp;
}

/// A nameserver instance hosting any number of scripted zones. The deepest
/// matching apex serves the query; queries outside every zone are refused.
class AttackerNameserver {
public:
  void add_zone(ZoneScript zone) {
    zone.validate();
    zones_.push_back(std::move(zone));
  }
  const std::vector<ZoneScript>& zones() const { return zones_; }
  QueryCounter& counters() { return counters_; }

  const ZoneScript* find_zone(const DnsName& qname) const {
    const ZoneScript* best = nullptr;
    for (const auto& z : zones_)
      if (name_ends_with(qname, z.apex))
        if (!best || z.apex.labels.size() > best->apex.labels.size()) best = &z;
    return best;
  }

  /// Every question this server has seen, for measurement assertions.
  const std::vector<Question>& query_log() const { return query_log_; }
  std::size_t queries_for(const DnsName& name) const {
    std::size_t n = 0;
    for (const auto& q : query_log_)
      if (names_equal_ci(q.name, name)) ++n;
    return n;
  }

  DnsMessage handle_query(const DnsMessage& query) {
    if (!query.questions.empty()) query_log_.push_back(query.questions[0]);
    if (query.questions.size() != 1) {
      DnsMessage resp;
      resp.txid = query.txid;
      resp.flags.qr = true;
      resp.flags.rcode = kRcodeFormErr;
      return resp;
    }
    const ZoneScript* z = find_zone(query.questions[0].name);
    if (!z) {
      DnsMessage resp;
      resp.txid = query.txid;
      resp.flags.qr = true;
      resp.questions = query.questions;
      resp.flags.rcode = kRcodeRefused;
      return resp;
    }
    return authoritative_answer(*z, counters_, query);
  }

private:
  std::vector<ZoneScript> zones_;
  QueryCounter counters_;
  std::vector<Question> query_log_;
};

// ---------------------------------------------------------------------------
// Zone script text format
//
//   $ORIGIN test.com.
//   $SIGN off
//   $SOA_MIN 60
//   ; comment
//   zero 60 IN CNAME www.target.com\000.test.com. [step=0 forever]
//   x    60 IN A     -                            [step=0 once soa-min=0]
//
// Names are presentation format; names without a trailing dot are relative
// to $ORIGIN; "@" is the apex. rdata "-" declares a step with no record.
// Directives: step=N, once, forever, authority, invalid, soa-min=N.
// ---------------------------------------------------------------------------

namespace detail {

struct ParsedDirectives {
  int step = 0;
  bool once = false;
  bool authority = false;
  bool invalid = false;
  std::optional<std::uint32_t> soa_minimum;
};

inline ParsedDirectives parse_directives(const std::string& text, int lineno) {
  ParsedDirectives d;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok == "once") d.once = true;
    else if (tok == "forever") d.once = false;
    else if (tok == "authority") d.authority = true;
    else if (tok == "invalid") d.invalid = true;
    else if (tok.rfind("step=", 0) == 0) d.step = std::stoi(tok.substr(5));
    else if (tok.rfind("soa-min=", 0) == 0) d.soa_minimum = std::stoul(tok.substr(8));
    else throw ZoneParseError(lineno, "unknown directive: " + tok);
  }
  return d;
}

inline DnsName zone_name(const std::string& text, const DnsName& apex, int lineno) {
  try {
    if (text == "@") return apex;
    DnsName n = name_from_presentation(text);
    if (!text.empty() && text.back() != '.') {
      n.labels.insert(n.labels.end(), apex.labels.begin(), apex.labels.end());
      if (name_wire_length(n) > kMaxNameWireLen)
        throw WireError(WireErrc::name_too_long, "relative name too long");
    }
    return n;
  } catch (const WireError& e) {
    throw ZoneParseError(lineno, std::string("bad name '") + text + "': " + e.what());
  }
}

inline std::vector<std::string> tokenize_quoted(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool open = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
        out.push_back(cur);
        cur.clear();
        open = false;
        continue;
      }
      cur.push_back(c);
      continue;
    }
    if (c == '"') {
      quoted = true;
      open = true;
      continue;
    }
    if (c == ' ' || c == '\t') {
      if (open) out.push_back(cur);
      cur.clear();
      open = false;
      continue;
    }
    cur.push_back(c);
    open = true;
  }
  if (open) out.push_back(cur);
  return out;
}

}  // namespace detail

inline ZoneScript load_zone_script(const std::string& text) {
  ZoneScript zone;
  bool have_origin = false;
  // (entry owner, type) -> accumulating steps keyed by step index
  struct Accum {
    std::map<int, AnswerStep> steps;
  };
  std::vector<std::pair<std::pair<std::string, std::uint16_t>, Accum>> accums;
  std::vector<std::pair<DnsName, RrType>> entry_names;

  auto accum_for = [&](const DnsName& owner, RrType type) -> Accum& {
    std::pair<std::string, std::uint16_t> key{ascii_lower(name_to_presentation(owner)),
                                              static_cast<std::uint16_t>(type)};
    for (auto& [k, a] : accums)
      if (k == key) return a;
    accums.push_back({key, {}});
    entry_names.push_back({owner, type});
    return accums.back().second;
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find(';'); c != std::string::npos) line.resize(c);
    std::string directives;
    if (auto lb = line.find('['); lb != std::string::npos) {
      auto rb = line.find(']', lb);
      if (rb == std::string::npos) throw ZoneParseError(lineno, "unterminated directive block");
      directives = line.substr(lb + 1, rb - lb - 1);
      line = line.substr(0, lb);
    }
    auto toks = detail::tokenize_quoted(line);
    if (toks.empty()) continue;

    if (toks[0] == "$ORIGIN") {
      if (toks.size() != 2) throw ZoneParseError(lineno, "$ORIGIN needs one name");
      zone.apex = detail::zone_name(toks[1], {}, lineno);
      have_origin = true;
      continue;
    }
    if (toks[0] == "$SIGN") {
      if (toks.size() != 2 || (toks[1] != "on" && toks[1] != "off"))
        throw ZoneParseError(lineno, "$SIGN needs on|off");
      zone.sign = toks[1] == "on";
      continue;
    }
    if (toks[0] == "$SOA_MIN") {
      if (toks.size() != 2) throw ZoneParseError(lineno, "$SOA_MIN needs a number");
      zone.soa_minimum = std::stoul(toks[1]);
      continue;
    }
    if (!have_origin) throw ZoneParseError(lineno, "record before $ORIGIN");
    if (toks.size() < 5) throw ZoneParseError(lineno, "expected: owner ttl class type rdata");

    DnsName owner = detail::zone_name(toks[0], zone.apex, lineno);
    std::uint32_t ttl = 0;
    try {
      ttl = std::stoul(toks[1]);
    } catch (...) {
      throw ZoneParseError(lineno, "bad ttl: " + toks[1]);
    }
    if (toks[2] != "IN") throw ZoneParseError(lineno, "only class IN is supported");
    auto type = rrtype_from_string(toks[3]);
    if (!type) throw ZoneParseError(lineno, "unknown type: " + toks[3]);

    auto d = detail::parse_directives(directives, lineno);

    ZoneRecord zr;
    zr.valid = !d.invalid;
    bool placeholder = toks[4] == "-" && toks.size() == 5;
    if (!placeholder) {
      ResourceRecord rr;
      rr.name = owner;
      rr.type = *type;
      rr.cls = RrClass::IN;
      rr.ttl = ttl;
      switch (*type) {
        case RrType::A: {
          auto a = ipv4_from_string(toks[4]);
          if (!a) throw ZoneParseError(lineno, "bad ipv4: " + toks[4]);
          rr.rdata = ARdata{*a};
          break;
        }
        case RrType::CNAME:
        case RrType::NS:
        case RrType::PTR:
          rr.rdata = NameRdata{detail::zone_name(toks[4], zone.apex, lineno)};
          break;
        case RrType::TXT: {
          TxtRdata t;
          for (std::size_t i = 4; i < toks.size(); ++i) t.strings.push_back(toks[i]);
          rr.rdata = t;
          break;
        }
        case RrType::SOA: {
          if (toks.size() < 11) throw ZoneParseError(lineno, "SOA needs 7 rdata fields");
          SoaRdata s;
          s.mname = detail::zone_name(toks[4], zone.apex, lineno);
          s.rname = detail::zone_name(toks[5], zone.apex, lineno);
          s.serial = std::stoul(toks[6]);
          s.refresh = std::stoul(toks[7]);
          s.retry = std::stoul(toks[8]);
          s.expire = std::stoul(toks[9]);
          s.minimum = std::stoul(toks[10]);
          rr.rdata = s;
          break;
        }
        default:
          throw ZoneParseError(lineno, "type not supported in zone text: " + toks[3]);
      }
      zr.record = rr;
    }

    Accum& acc = accum_for(owner, *type);
    AnswerStep& step = acc.steps[d.step];
    step.forever = !d.once;
    if (d.soa_minimum) step.soa_minimum = d.soa_minimum;
    if (!placeholder) {
      if (d.authority) step.authority.push_back(zr);
      else step.answers.push_back(zr);
    }
  }

  if (!have_origin) throw ZoneParseError(lineno ? lineno : 1, "missing $ORIGIN");

  for (std::size_t i = 0; i < accums.size(); ++i) {
    ScriptEntry e;
    e.owner = entry_names[i].first;
    e.rrtype = entry_names[i].second;
    for (auto& [idx, step] : accums[i].second.steps) e.schedule.push_back(std::move(step));
    if (e.schedule.empty()) continue;
    if (!e.schedule.back().forever) e.schedule.back().forever = true;
    zone.entries.push_back(std::move(e));
  }
  zone.validate();
  return zone;
}

inline std::string zone_to_text(const ZoneScript& zone) {
  std::ostringstream out;
  out << "$ORIGIN " << name_to_presentation(zone.apex) << "\n";
  out << "$SIGN " << (zone.sign ? "on" : "off") << "\n";
  out << "$SOA_MIN " << zone.soa_minimum << "\n";
  for (const auto& e : zone.entries) {
    for (std::size_t si = 0; si < e.schedule.size(); ++si) {
      const AnswerStep& s = e.schedule[si];
      auto directives = [&](bool line_authority) {
        std::string d = "[step=" + std::to_string(si) + (s.forever ? " forever" : " once");
        if (line_authority) d += " authority";
        if (s.soa_minimum) d += " soa-min=" + std::to_string(*s.soa_minimum);
        return d + "]";
      };
      auto emit = [&](const ZoneRecord& zr, bool authority) {
        const ResourceRecord& rr = zr.record;
        out << name_to_presentation(rr.name) << " " << rr.ttl << " IN "
            << rrtype_to_string(rr.type) << " ";
        if (const auto* a = std::get_if<ARdata>(&rr.rdata)) out << ipv4_to_string(a->addr);
        else if (const auto* n = std::get_if<NameRdata>(&rr.rdata))
          out << name_to_presentation(n->target);
        else if (const auto* t = std::get_if<TxtRdata>(&rr.rdata)) {
          for (std::size_t i = 0; i < t->strings.size(); ++i)
            out << (i ? " " : "") << '"' << t->strings[i] << '"';
        } else if (const auto* soa = std::get_if<SoaRdata>(&rr.rdata)) {
          out << name_to_presentation(soa->mname) << " " << name_to_presentation(soa->rname)
              << " " << soa->serial << " " << soa->refresh << " " << soa->retry << " "
              << soa->expire << " " << soa->minimum;
        }
        std::string d = directives(authority);
        if (!zr.valid) d.insert(d.size() - 1, " invalid");
        out << " " << d << "\n";
      };
      if (s.answers.empty() && s.authority.empty()) {
        out << name_to_presentation(e.owner) << " 0 IN " << rrtype_to_string(e.rrtype)
            << " - " << directives(false) << "\n";
      }
      for (const auto& zr : s.answers) emit(zr, false);
      for (const auto& zr : s.authority) emit(zr, true);
    }
  }
  return out.str();
}

}  // namespace dnslab
