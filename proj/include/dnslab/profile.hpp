#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnslab {

enum class CacheModel { none, record_cache, qname_addr_map, qname_packet_map };
enum class Decoder { strict, naive };
enum class TxidPolicy { fresh_random, forward_client, sequential };
enum class PortPolicy { random_per_query, random_at_boot, static_port, time_seeded_at_boot };
enum class CdPolicy { clear_flag, forward_and_cache, forward_no_cache };
enum class EdnsBehavior { pass, strip, break_response };

inline const char* to_string(CacheModel v) {
  switch (v) {
    case CacheModel::none: return "none";
    case CacheModel::record_cache: return "record_cache";
    case CacheModel::qname_addr_map: return "qname_addr_map";
    case CacheModel::qname_packet_map: return "qname_packet_map";
  }
  return "?";
}
inline const char* to_string(Decoder v) {
  return v == Decoder::strict ? "strict" : "naive";
}
inline const char* to_string(TxidPolicy v) {
  switch (v) {
    case TxidPolicy::fresh_random: return "fresh_random";
    case TxidPolicy::forward_client: return "forward_client";
    case TxidPolicy::sequential: return "sequential";
  }
  return "?";
}
inline const char* to_string(PortPolicy v) {
  switch (v) {
    case PortPolicy::random_per_query: return "random_per_query";
    case PortPolicy::random_at_boot: return "random_at_boot";
    case PortPolicy::static_port: return "static";
    case PortPolicy::time_seeded_at_boot: return "time_seeded_at_boot";
  }
  return "?";
}
inline const char* to_string(CdPolicy v) {
  switch (v) {
    case CdPolicy::clear_flag: return "clear_flag";
    case CdPolicy::forward_and_cache: return "forward_and_cache";
    case CdPolicy::forward_no_cache: return "forward_no_cache";
  }
  return "?";
}
inline const char* to_string(EdnsBehavior v) {
  switch (v) {
    case EdnsBehavior::pass: return "pass";
    case EdnsBehavior::strip: return "strip";
    case EdnsBehavior::break_response: return "break_response";
  }
  return "?";
}

class ProfileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Everything that distinguishes one forwarder implementation from another.
/// Each field corresponds to an observed class of firmware behavior.
struct ForwarderProfile {
  std::string name = "custom";
  CacheModel cache_model = CacheModel::none;
  Decoder decoder = Decoder::strict;
  TxidPolicy txid_policy = TxidPolicy::fresh_random;
  std::uint16_t txid_start = 1;  // sequential policy only
  PortPolicy port_policy = PortPolicy::random_per_query;
  std::uint16_t static_port = 1024;  // static policy only
  CdPolicy cd_policy = CdPolicy::forward_no_cache;
  bool tcp_supported = true;
  EdnsBehavior edns_behavior = EdnsBehavior::pass;
  bool cname_merge = false;
  std::string version_bind;  // answer to version.bind CH TXT; empty = none
  // Device clock semantics feeding time_seeded_at_boot: a reset clock with a
  // fixed daemon start delay makes every boot seed identical.
  bool clock_resets_on_boot = false;
  std::uint32_t daemon_start_delay = 0;

  void validate() const {
    if ((cache_model == CacheModel::qname_addr_map ||
         cache_model == CacheModel::qname_packet_map) &&
        decoder != Decoder::naive)
      throw ProfileError("map cache models require the naive decoder");
    if (port_policy == PortPolicy::static_port &&
        (static_port < 1024))
      throw ProfileError("static port must be in [1024, 65535]");
  }
};

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ProfileError("bad boolean: " + v);
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Flat key/value profile text, '#' comments. Unknown keys are errors so
/// typos do not silently fall back to defaults.
inline ForwarderProfile parse_profile(const std::string& text) {
  ForwarderProfile p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ProfileError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    try {
      if (key == "name") p.name = val;
      else if (key == "cache_model") {
        if (val == "none") p.cache_model = CacheModel::none;
        else if (val == "record_cache") p.cache_model = CacheModel::record_cache;
        else if (val == "qname_addr_map") p.cache_model = CacheModel::qname_addr_map;
        else if (val == "qname_packet_map") p.cache_model = CacheModel::qname_packet_map;
        else throw ProfileError("bad cache_model: " + val);
      } else if (key == "decoder") {
        if (val == "strict") p.decoder = Decoder::strict;
        else if (val == "naive") p.decoder = Decoder::naive;
        else throw ProfileError("bad decoder: " + val);
      } else if (key == "txid_policy") {
        if (val == "fresh_random") p.txid_policy = TxidPolicy::fresh_random;
        else if (val == "forward_client") p.txid_policy = TxidPolicy::forward_client;
        else if (val == "sequential") p.txid_policy = TxidPolicy::sequential;
        else throw ProfileError("bad txid_policy: " + val);
      } else if (key == "txid_start") p.txid_start = static_cast<std::uint16_t>(std::stoul(val));
      else if (key == "port_policy") {
        if (val == "random_per_query") p.port_policy = PortPolicy::random_per_query;
        else if (val == "random_at_boot") p.port_policy = PortPolicy::random_at_boot;
        else if (val == "static") p.port_policy = PortPolicy::static_port;
        else if (val == "time_seeded_at_boot") p.port_policy = PortPolicy::time_seeded_at_boot;
        else throw ProfileError("bad port_policy: " + val);
      } else if (key == "static_port") p.static_port = static_cast<std::uint16_t>(std::stoul(val));
      else if (key == "cd_policy") {
        if (val == "clear_flag") p.cd_policy = CdPolicy::clear_flag;
        else if (val == "forward_and_cache") p.cd_policy = CdPolicy::forward_and_cache;
        else if (val == "forward_no_cache") p.cd_policy = CdPolicy::forward_no_cache;
        else throw ProfileError("bad cd_policy: " + val);
      } else if (key == "tcp_supported") p.tcp_supported = detail::parse_bool(val);
      else if (key == "edns_behavior") {
        if (val == "pass") p.edns_behavior = EdnsBehavior::pass;
        else if (val == "strip") p.edns_behavior = EdnsBehavior::strip;
        else if (val == "break_response") p.edns_behavior = EdnsBehavior::break_response;
        else throw ProfileError("bad edns_behavior: " + val);
      } else if (key == "cname_merge") p.cname_merge = detail::parse_bool(val);
      else if (key == "version_bind") p.version_bind = val;
      else if (key == "clock_resets_on_boot") p.clock_resets_on_boot = detail::parse_bool(val);
      else if (key == "daemon_start_delay") p.daemon_start_delay = std::stoul(val);
      else throw ProfileError("unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw ProfileError("line " + std::to_string(lineno) + ": bad number: " + val);
    } catch (const ProfileError& e) {
      throw ProfileError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  p.validate();
  return p;
}

inline std::string profile_to_text(const ForwarderProfile& p) {
  std::ostringstream out;
  out << "name = " << p.name << "\n";
  out << "cache_model = " << to_string(p.cache_model) << "\n";
  out << "decoder = " << to_string(p.decoder) << "\n";
  out << "txid_policy = " << to_string(p.txid_policy) << "\n";
  if (p.txid_policy == TxidPolicy::sequential) out << "txid_start = " << p.txid_start << "\n";
  out << "port_policy = " << to_string(p.port_policy) << "\n";
  if (p.port_policy == PortPolicy::static_port) out << "static_port = " << p.static_port << "\n";
  out << "cd_policy = " << to_string(p.cd_policy) << "\n";
  out << "tcp_supported = " << (p.tcp_supported ? "true" : "false") << "\n";
  out << "edns_behavior = " << to_string(p.edns_behavior) << "\n";
  out << "cname_merge = " << (p.cname_merge ? "true" : "false") << "\n";
  if (!p.version_bind.empty()) out << "version_bind = " << p.version_bind << "\n";
  if (p.clock_resets_on_boot) {
    out << "clock_resets_on_boot = true\n";
    out << "daemon_start_delay = " << p.daemon_start_delay << "\n";
  }
  return out.str();
}

/// Built-in device archetypes. Each bundle reflects one observed combination
/// of cache architecture, decoder, and policy choices.
inline ForwarderProfile builtin_profile(const std::string& name) {
  ForwarderProfile p;
  p.name = name;
  if (name == "dproxy-like") {
    p.cache_model = CacheModel::qname_addr_map;
    p.decoder = Decoder::naive;
    p.txid_policy = TxidPolicy::forward_client;
    p.port_policy = PortPolicy::random_at_boot;
    p.cd_policy = CdPolicy::forward_and_cache;
    p.tcp_supported = false;
    p.edns_behavior = EdnsBehavior::break_response;
    p.cname_merge = true;
  } else if (name == "dnrd-like") {
    p.cache_model = CacheModel::qname_packet_map;
    p.decoder = Decoder::naive;
    p.txid_policy = TxidPolicy::fresh_random;
    p.port_policy = PortPolicy::random_per_query;
    p.cd_policy = CdPolicy::clear_flag;
    p.tcp_supported = true;
    p.cname_merge = false;
  } else if (name == "tenda-like") {
    p.cache_model = CacheModel::qname_addr_map;
    p.decoder = Decoder::naive;
    p.txid_policy = TxidPolicy::fresh_random;
    p.port_policy = PortPolicy::time_seeded_at_boot;
    p.cd_policy = CdPolicy::forward_and_cache;
    p.tcp_supported = false;
    p.cname_merge = true;
    p.clock_resets_on_boot = true;
    p.daemon_start_delay = 7;
  } else if (name == "dnsmasq-like") {
    p.cache_model = CacheModel::record_cache;
    p.decoder = Decoder::strict;
    p.txid_policy = TxidPolicy::fresh_random;
    p.port_policy = PortPolicy::random_per_query;
    p.cd_policy = CdPolicy::forward_no_cache;
    p.tcp_supported = true;
    p.cname_merge = false;
    p.version_bind = "dnsmasq-2.78";
  } else if (name == "bintec-like") {
    p.cache_model = CacheModel::record_cache;
    p.decoder = Decoder::naive;
    p.txid_policy = TxidPolicy::fresh_random;
    p.port_policy = PortPolicy::random_per_query;
    p.cd_policy = CdPolicy::clear_flag;
    p.tcp_supported = false;
    p.cname_merge = true;
  } else {
    throw ProfileError("unknown builtin profile: " + name);
  }
  p.validate();
  return p;
}

inline const std::vector<std::string>& builtin_profile_names() {
  static const std::vector<std::string> names = {
      "dproxy-like", "dnrd-like", "tenda-like", "dnsmasq-like", "bintec-like"};
  return names;
}

}  // namespace dnslab
