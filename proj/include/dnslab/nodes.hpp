#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dnslab/forwarder.hpp"
#include "dnslab/resolver.hpp"
#include "dnslab/simnet.hpp"
#include "dnslab/zone.hpp"

namespace dnslab {

/// Addresses used by the simulated lab topology.
struct LabTopology {
  Endpoint forwarder_lan = *Endpoint::parse("10.0.0.1:53");     // client-facing
  std::uint32_t forwarder_wan_addr = 0xC6336401;                // 198.51.100.1
  Endpoint upstream = *Endpoint::parse("198.51.100.34:53");     // recursive resolver
  Endpoint stub = *Endpoint::parse("10.0.0.2:33000");           // victim device
  Endpoint honest_client = *Endpoint::parse("10.0.0.3:33001");  // verification vantage
  Endpoint attacker_client = *Endpoint::parse("10.0.0.4:33002");// attacker-owned device
  Endpoint scanner = *Endpoint::parse("10.0.0.9:33009");
  Endpoint attacker_wan = *Endpoint::parse("203.0.113.66:4444");// off-path spoofing host
};

/// Wraps the forwarder state machine as a network node: executes its actions,
/// opens and closes upstream-facing ports, and handles TCP framing.
class ForwarderNode : public SimNode {
public:
  ForwarderNode(SimNetwork& net, ForwarderProfile profile, std::uint64_t seed,
                const LabTopology& topo, std::uint32_t boot_unix_seconds = 100000)
      : fwd_(std::move(profile), seed, topo.upstream, boot_unix_seconds),
        lan_(topo.forwarder_lan),
        wan_addr_(topo.forwarder_wan_addr) {
    net.bind(lan_, this);
    bind_boot_port(net);
  }

  Forwarder& forwarder() { return fwd_; }
  const Forwarder& forwarder() const { return fwd_; }

  void reboot(SimNetwork& net, std::uint32_t boot_unix_seconds) {
    for (std::uint16_t p : bound_ports_) net.unbind({wan_addr_, p});
    bound_ports_.clear();
    fwd_.reboot(boot_unix_seconds);
    bind_boot_port(net);
  }

  void on_packet(SimNetwork& net, SimTime now, const SimPacket& p) override {
    std::vector<ForwarderAction> actions;
    if (p.dst == lan_) {
      std::vector<std::uint8_t> payload = p.bytes;
      if (p.transport == Transport::tcp) {
        payload = unframe_tcp(payload);
        if (payload.empty()) return;
      }
      actions = fwd_.handle_client_query(p.src, p.transport, std::move(payload), now / 1000);
    } else if (p.dst.addr == wan_addr_) {
      actions = fwd_.handle_upstream_response(p.src, p.dst.port, p.bytes, now / 1000);
    } else {
      return;
    }
    for (auto& a : actions) apply(net, std::move(a));
  }

private:
  void bind_boot_port(SimNetwork& net) {
    if (auto port = fwd_.boot_port()) {
      net.bind({wan_addr_, *port}, this);
      bound_ports_.insert(*port);
    }
  }

  void apply(SimNetwork& net, ForwarderAction action) {
    if (auto* send = std::get_if<SendToClient>(&action)) {
      std::vector<std::uint8_t> bytes = std::move(send->bytes);
      if (send->transport == Transport::tcp) bytes = frame_tcp(bytes);
      net.send(lan_, send->client, send->transport, std::move(bytes));
    } else if (auto* up = std::get_if<SendUpstream>(&action)) {
      Endpoint src{wan_addr_, up->src_port};
      if (!bound_ports_.count(up->src_port)) {
        net.bind(src, this);
        bound_ports_.insert(up->src_port);
      }
      net.send(src, fwd_.upstream(), Transport::udp, std::move(up->bytes));
    } else if (auto* closed = std::get_if<PortClosed>(&action)) {
      if (bound_ports_.erase(closed->port)) net.unbind({wan_addr_, closed->port});
    }
    // Drop actions need no network effect.
  }

  Forwarder fwd_;
  Endpoint lan_;
  std::uint32_t wan_addr_;
  std::set<std::uint16_t> bound_ports_;
};

/// The upstream recursive resolver as a node, with a measurement tap: every
/// arriving query's txid, source port, and CD bit are recorded. A configurable
/// service delay models the genuine answer losing a race.
class RecursiveNode : public SimNode {
public:
  RecursiveNode(SimNetwork& net, Endpoint ep, RecursiveConfig cfg = {})
      : resolver_(cfg), ep_(ep) {
    net.bind(ep_, this);
  }

  RecursiveResolver& resolver() { return resolver_; }
  const std::vector<TapObservation>& taps() const { return taps_; }
  void set_response_delay_us(SimTime d) { response_delay_us_ = d; }

  void on_packet(SimNetwork& net, SimTime now, const SimPacket& p) override {
    ParseResult pr = parse_message(p.bytes);
    if (!pr.ok() && pr.message.questions.empty()) return;
    if (!pr.message.questions.empty()) {
      const Question& q = pr.message.questions[0];
      taps_.push_back(TapObservation{now / 1000, pr.message.txid, p.src.port, q.name, q.type,
                                     pr.message.flags.cd});
    }
    DnsMessage resp = resolver_.handle_query(pr.message, now / 1000);
    net.send_after(response_delay_us_, ep_, p.src, Transport::udp, serialize_message(resp));
  }

private:
  RecursiveResolver resolver_;
  Endpoint ep_;
  SimTime response_delay_us_ = 200;
  std::vector<TapObservation> taps_;
};

/// Scripted client: sends queries, collects whatever comes back.
class ClientNode : public SimNode {
public:
  ClientNode(SimNetwork& net, Endpoint ep, Endpoint server) : ep_(ep), server_(server) {
    net.bind(ep_, this);
  }

  void send_query(SimNetwork& net, const DnsMessage& query, Transport transport = Transport::udp) {
    send_raw(net, serialize_message(query), transport);
  }

  void send_raw(SimNetwork& net, std::vector<std::uint8_t> bytes,
                Transport transport = Transport::udp) {
    if (transport == Transport::tcp) bytes = frame_tcp(bytes);
    net.send(ep_, server_, transport, std::move(bytes));
  }

  std::size_t response_count() const { return responses_.size(); }
  const std::vector<DnsMessage>& responses() const { return responses_; }
  const DnsMessage& last_response() const { return responses_.back(); }
  void clear() {
    responses_.clear();
    raw_responses_.clear();
  }

  void on_packet(SimNetwork&, SimTime, const SimPacket& p) override {
    std::vector<std::uint8_t> payload = p.bytes;
    if (p.transport == Transport::tcp) {
      payload = unframe_tcp(payload);
      if (payload.empty()) return;
    }
    ParseResult pr = parse_message(payload);
    responses_.push_back(pr.message);
    raw_responses_.push_back(std::move(payload));
  }

  const std::vector<std::vector<std::uint8_t>>& raw_responses() const { return raw_responses_; }

private:
  Endpoint ep_;
  Endpoint server_;
  std::vector<DnsMessage> responses_;
  std::vector<std::vector<std::uint8_t>> raw_responses_;
};

/// OS-style stub resolver: validates the *initial* lookup name, but chases
/// dangling alias targets verbatim — those arrive from DNS itself and bypass
/// application-level input checks. One retransmission per query, then timeout.
class StubNode : public SimNode {
public:
  StubNode(SimNetwork& net, Endpoint ep, Endpoint server, StubConfig cfg, std::uint64_t seed)
      : ep_(ep), server_(server), cfg_(cfg), rng_(seed) {
    net.bind(ep_, this);
  }

  const StubResult& result() const { return result_; }
  bool done() const { return done_; }

  void lookup(SimNetwork& net, const DnsName& name) {
    done_ = false;
    result_ = {};
    depth_ = 0;
    if (name_has_special_bytes(name)) {
      result_.status = StubStatus::rejected_input;
      done_ = true;
      return;
    }
    send(net, name);
  }

  void on_packet(SimNetwork& net, SimTime, const SimPacket& p) override {
    if (done_) return;
    ParseResult pr = parse_message(p.bytes);
    if (pr.message.txid != txid_) return;  // stale or foreign
    StubDecision d = stub_interpret(pr.message, cur_, cfg_.chase_incomplete_cname);
    switch (d.kind) {
      case StubDecision::take_address:
        result_.status = StubStatus::ok;
        result_.addr = d.addr;
        result_.final_name = cur_;
        done_ = true;
        return;
      case StubDecision::chase:
        if (depth_ >= cfg_.max_chase_depth) {
          result_.status = StubStatus::chase_depth_exceeded;
          done_ = true;
          return;
        }
        ++depth_;
        send(net, d.next);  // raw bytes: no input validation on this path
        return;
      case StubDecision::give_up:
        result_.status = StubStatus::no_address;
        done_ = true;
        return;
    }
  }

  void on_timer(SimNetwork& net, SimTime, std::uint64_t timer_id) override {
    if (done_ || timer_id != attempt_) return;
    if (retries_left_ > 0) {
      --retries_left_;
      resend(net);
      return;
    }
    result_.status = StubStatus::timeout;
    done_ = true;
  }

private:
  void send(SimNetwork& net, const DnsName& name) {
    cur_ = name;
    txid_ = rng_.txid();
    retries_left_ = cfg_.retransmits;
    ++result_.queries_sent;
    ++attempt_;
    net.send(ep_, server_, Transport::udp, serialize_message(make_query(txid_, cur_, RrType::A)));
    net.schedule(this, cfg_.timeout_ms * 1000, attempt_);
  }

  void resend(SimNetwork& net) {
    ++result_.queries_sent;
    ++attempt_;
    net.send(ep_, server_, Transport::udp, serialize_message(make_query(txid_, cur_, RrType::A)));
    net.schedule(this, cfg_.timeout_ms * 1000, attempt_);
  }

  Endpoint ep_;
  Endpoint server_;
  StubConfig cfg_;
  SeededRng rng_;
  DnsName cur_;
  std::uint16_t txid_ = 0;
  int depth_ = 0;
  int retries_left_ = 0;
  std::uint64_t attempt_ = 0;
  bool done_ = false;
  StubResult result_;
};

/// Off-path spoofing host: fires a precomputed list of (destination port,
/// txid) shots at the forwarder's WAN address, each carrying the same forged
/// response payload with its source address set to the upstream resolver's.
class SpooferNode : public SimNode {
public:
  struct Plan {
    Endpoint spoofed_src;              // the upstream resolver's address
    std::uint32_t target_addr = 0;     // forwarder WAN address
    std::vector<std::uint8_t> payload; // forged response; txid patched per shot
    std::vector<std::pair<std::uint16_t, std::uint16_t>> shots;  // (dst port, txid)
    SimTime spacing_us = 1;
  };

  explicit SpooferNode(Plan plan) : plan_(std::move(plan)) {}

  void start(SimNetwork& net) { net.schedule(this, 0, 0); }
  void stop() { stopped_ = true; }
  std::uint64_t packets_sent() const { return sent_; }

  void on_packet(SimNetwork&, SimTime, const SimPacket&) override {}

  void on_timer(SimNetwork& net, SimTime, std::uint64_t) override {
    if (stopped_ || sent_ >= plan_.shots.size()) return;
    auto [port, txid] = plan_.shots[sent_];
    std::vector<std::uint8_t> bytes = plan_.payload;
    detail::patch_txid(bytes, txid);
    net.send(plan_.spoofed_src, Endpoint{plan_.target_addr, port}, Transport::udp,
             std::move(bytes));
    ++sent_;
    net.schedule(this, plan_.spacing_us, 0);
  }

private:
  Plan plan_;
  std::uint64_t sent_ = 0;
  bool stopped_ = false;
};

}  // namespace dnslab
