#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnslab/endpoint.hpp"
#include "dnslab/message.hpp"

namespace dnslab {

using SimTime = std::uint64_t;  // microseconds since simulation start

struct SimPacket {
  Endpoint src;
  Endpoint dst;
  Transport transport = Transport::udp;
  std::vector<std::uint8_t> bytes;
};

class SimNetwork;

class SimNode {
public:
  virtual ~SimNode() = default;
  virtual void on_packet(SimNetwork& net, SimTime now, const SimPacket& packet) = 0;
  virtual void on_timer(SimNetwork& net, SimTime now, std::uint64_t timer_id) {
    (void)net;
    (void)now;
    (void)timer_id;
  }
};

/// Deterministic single-threaded packet network. Events are ordered by
/// (time, insertion sequence), so identical inputs replay identically.
/// Senders choose their own source endpoint — address spoofing is a
/// first-class capability, exactly like an off-path attacker on a real
/// network. Packets to endpoints nobody is bound to are dropped at send time.
class SimNetwork {
public:
  explicit SimNetwork(SimTime latency_us = 1000) : latency_us_(latency_us) {}

  void bind(const Endpoint& ep, SimNode* node) {
    auto [it, inserted] = bindings_.insert({ep, node});
    if (!inserted && it->second != node)
      throw std::runtime_error("endpoint already bound: " + ep.to_string());
    it->second = node;
  }
  void unbind(const Endpoint& ep) { bindings_.erase(ep); }
  bool bound(const Endpoint& ep) const { return bindings_.count(ep) != 0; }

  void send(const Endpoint& src, const Endpoint& dst, Transport transport,
            std::vector<std::uint8_t> bytes) {
    send_after(0, src, dst, transport, std::move(bytes));
  }

  /// Send with additional delay on top of the base link latency; used to
  /// model a slow upstream losing the race against a spoofing flood.
  void send_after(SimTime extra_delay_us, const Endpoint& src, const Endpoint& dst,
                  Transport transport, std::vector<std::uint8_t> bytes) {
    auto it = bindings_.find(dst);
    if (it == bindings_.end()) {
      ++dropped_unroutable_;
      return;
    }
    trace(src, dst, bytes);
    Event ev;
    ev.at = now_ + latency_us_ + extra_delay_us;
    ev.seq = next_seq_++;
    ev.node = it->second;
    ev.packet = SimPacket{src, dst, transport, std::move(bytes)};
    ev.is_timer = false;
    queue_.push(std::move(ev));
  }

  void schedule(SimNode* node, SimTime delay_us, std::uint64_t timer_id) {
    Event ev;
    ev.at = now_ + delay_us;
    ev.seq = next_seq_++;
    ev.node = node;
    ev.timer_id = timer_id;
    ev.is_timer = true;
    queue_.push(std::move(ev));
  }

  struct RunResult {
    std::uint64_t events = 0;
    bool quiescent = false;  // queue drained before the predicate fired
  };

  RunResult run_until(const std::function<bool()>& done, std::uint64_t max_events = 1000000) {
    RunResult r;
    while (r.events < max_events) {
      if (done && done()) return r;
      if (queue_.empty()) {
        r.quiescent = true;
        return r;
      }
      step();
      ++r.events;
    }
    return r;
  }

  RunResult run(std::uint64_t max_events = 1000000) { return run_until(nullptr, max_events); }

  SimTime now() const { return now_; }
  std::uint64_t dropped_unroutable() const { return dropped_unroutable_; }

  // -- transcript ----------------------------------------------------------
  void enable_transcript(std::size_t max_lines = 200) {
    transcript_enabled_ = true;
    transcript_max_ = max_lines;
  }
  void note(const std::string& line) {
    if (transcript_enabled_) push_line("-- " + line);
  }
  const std::vector<std::string>& transcript() const { return transcript_; }
  std::uint64_t transcript_suppressed() const { return transcript_suppressed_; }

private:
  struct Event {
    SimTime at = 0;
    std::uint64_t seq = 0;
    SimNode* node = nullptr;
    SimPacket packet;
    std::uint64_t timer_id = 0;
    bool is_timer = false;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void step() {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.at;
    if (ev.is_timer) ev.node->on_timer(*this, now_, ev.timer_id);
    else ev.node->on_packet(*this, now_, ev.packet);
  }

  void trace(const Endpoint& src, const Endpoint& dst, const std::vector<std::uint8_t>& bytes) {
    if (!transcript_enabled_) return;
    std::string line = "t=" + std::to_string(now_) + "us " + src.to_string() + " -> " +
                       dst.to_string() + " ";
    ParseResult pr = parse_message(bytes);
    line += pr.ok() ? summarize(pr.message) : "unparseable len=" + std::to_string(bytes.size());
    push_line(std::move(line));
  }

  void push_line(std::string line) {
    if (transcript_.size() >= transcript_max_) {
      ++transcript_suppressed_;
      return;
    }
    transcript_.push_back(std::move(line));
  }

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<Endpoint, SimNode*> bindings_;
  SimTime now_ = 0;
  SimTime latency_us_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dropped_unroutable_ = 0;
  bool transcript_enabled_ = false;
  std::size_t transcript_max_ = 200;
  std::vector<std::string> transcript_;
  std::uint64_t transcript_suppressed_ = 0;
};

}  // namespace dnslab
