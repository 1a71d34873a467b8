#pragma once

// Loopback deployment of the laboratory over real POSIX sockets (IPv4/UDP,
// plus TCP where a device profile supports it). The same Forwarder and
// RecursiveResolver state machines that drive the deterministic simulation
// are wired to the operating system's network stack here, so a profile can
// be probed with any external DNS client — or with the built-in scanner via
// UdpScanTransport.
//
// Scope: serving and scanning only. The forgery scenarios stay in the
// simulation, where source-address spoofing is a modeling primitive instead
// of a privileged raw-socket operation.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dnslab/endpoint.hpp"
#include "dnslab/forwarder.hpp"
#include "dnslab/resolver.hpp"
#include "dnslab/scanner.hpp"
#include "dnslab/zoneset.hpp"

namespace dnslab {

namespace detail {

inline sockaddr_in to_sockaddr(Endpoint ep) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(ep.addr);
  sa.sin_port = htons(ep.port);
  return sa;
}

inline Endpoint from_sockaddr(const sockaddr_in& sa) {
  return Endpoint{ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)};
}

inline std::uint64_t monotonic_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count());
}

[[noreturn]] inline void throw_errno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

}  // namespace detail

/// Move-only RAII wrapper over one IPv4 UDP socket.
class UdpSocket {
public:
  UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) detail::throw_errno("socket");
  }
  explicit UdpSocket(Endpoint bind_to) : UdpSocket() { bind(bind_to); }
  ~UdpSocket() { reset(); }

  UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  UdpSocket& operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  void bind(Endpoint ep) {
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa = detail::to_sockaddr(ep);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
      detail::throw_errno("bind " + ep.to_string());
  }

  Endpoint local() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0)
      detail::throw_errno("getsockname");
    return detail::from_sockaddr(sa);
  }

  void send_to(Endpoint dst, const std::vector<std::uint8_t>& bytes) const {
    sockaddr_in sa = detail::to_sockaddr(dst);
    ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
  }

  /// Blocks up to timeout_ms for one datagram; nullopt on timeout.
  std::optional<std::pair<Endpoint, std::vector<std::uint8_t>>> recv(int timeout_ms) const {
    pollfd pfd{fd_, POLLIN, 0};
    int n = ::poll(&pfd, 1, timeout_ms);
    if (n <= 0) return std::nullopt;
    return recv_now();
  }

  /// Non-blocking read of one queued datagram; nullopt when none is waiting.
  std::optional<std::pair<Endpoint, std::vector<std::uint8_t>>> recv_now() const {
    std::vector<std::uint8_t> buf(4096);
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    ssize_t got = ::recvfrom(fd_, buf.data(), buf.size(), MSG_DONTWAIT,
                             reinterpret_cast<sockaddr*>(&sa), &len);
    if (got < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(got));
    return std::make_pair(detail::from_sockaddr(sa), std::move(buf));
  }

  int fd() const { return fd_; }

private:
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Upstream side: a recursive resolver plus scripted authority, served over
// UDP, with an optional query tap written as JSON lines. The tap file plays
// the cooperating-upstream role: a scanner pointed at a forwarder can read
// it to learn which transaction ids and source ports the device used.
// ---------------------------------------------------------------------------

struct LiveUpstreamOptions {
  Endpoint listen = *Endpoint::parse("127.0.0.1:5302");
  std::string zone_set = "scan";  // scan | payload | chase | chase-dot | secure
  std::string tap_log;            // JSON-lines file path; empty disables the tap
  RecursiveConfig recursive;
  LabNames names;
};

class LiveUpstream {
public:
  explicit LiveUpstream(LiveUpstreamOptions opt)
      : opt_(std::move(opt)), resolver_(opt_.recursive), sock_(opt_.listen) {
    for (auto& z : builtin_zones_by_name(opt_.zone_set, opt_.names)) ns_.add_zone(std::move(z));
    resolver_.add_server(&ns_);
    if (!opt_.tap_log.empty()) {
      tap_.open(opt_.tap_log, std::ios::app);
      if (!tap_) throw std::runtime_error("cannot open tap log " + opt_.tap_log);
    }
  }

  Endpoint endpoint() const { return sock_.local(); }
  std::uint64_t queries_served() const { return served_; }

  /// Handles at most one datagram; true if one was handled.
  bool poll_once(int timeout_ms) {
    auto pkt = sock_.recv(timeout_ms);
    if (!pkt) return false;
    handle(pkt->first, std::move(pkt->second));
    return true;
  }

  void run(const std::atomic<bool>& stop, int slice_ms = 50) {
    while (!stop.load(std::memory_order_relaxed)) poll_once(slice_ms);
  }

private:
  void handle(Endpoint src, std::vector<std::uint8_t> bytes) {
    ParseResult parsed = parse_message(bytes);
    if (!parsed.ok() || parsed.message.flags.qr || parsed.message.questions.empty()) return;
    const Question& q = parsed.message.questions.front();
    if (tap_.is_open()) {
      nlohmann::json line{{"time_ms", detail::monotonic_ms()},
                          {"txid", parsed.message.txid},
                          {"src_port", src.port},
                          {"qname", name_to_presentation(q.name)},
                          {"qtype", static_cast<std::uint16_t>(q.type)},
                          {"cd", parsed.message.flags.cd}};
      tap_ << line.dump() << "\n";
      tap_.flush();
    }
    DnsMessage resp = resolver_.handle_query(parsed.message, detail::monotonic_ms());
    sock_.send_to(src, serialize_message(resp));
    ++served_;
  }

  LiveUpstreamOptions opt_;
  AttackerNameserver ns_;
  RecursiveResolver resolver_;
  UdpSocket sock_;
  std::ofstream tap_;
  std::uint64_t served_ = 0;
};

// ---------------------------------------------------------------------------
// Device side: one forwarder profile served on a loopback endpoint. Client
// queries arrive over UDP (and TCP when the profile supports it); upstream
// queries leave from real sockets bound to the ports the profile's policy
// selects, so the port behavior is observable on the wire.
// ---------------------------------------------------------------------------

struct LiveForwarderOptions {
  Endpoint listen = *Endpoint::parse("127.0.0.1:5300");
  Endpoint upstream = *Endpoint::parse("127.0.0.1:5302");
  std::uint32_t boot_unix_seconds = 0;  // feeds time-seeded port selection
};

class LiveForwarder {
public:
  LiveForwarder(ForwarderProfile profile, std::uint64_t seed, LiveForwarderOptions opt)
      : opt_(std::move(opt)),
        core_(std::move(profile), seed, opt_.upstream, opt_.boot_unix_seconds),
        client_sock_(opt_.listen) {
    if (core_.profile().tcp_supported) {
      tcp_listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
      if (tcp_listen_fd_ < 0) detail::throw_errno("socket(tcp)");
      int one = 1;
      ::setsockopt(tcp_listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      sockaddr_in sa = detail::to_sockaddr(client_sock_.local());
      if (::bind(tcp_listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
        detail::throw_errno("bind(tcp) " + client_sock_.local().to_string());
      if (::listen(tcp_listen_fd_, 8) != 0) detail::throw_errno("listen");
    }
    ensure_boot_socket();
  }

  ~LiveForwarder() {
    if (tcp_listen_fd_ >= 0) ::close(tcp_listen_fd_);
    for (auto& [ep, fd] : tcp_conns_) ::close(fd);
  }

  Endpoint endpoint() const { return client_sock_.local(); }
  const Forwarder& core() const { return core_; }

  /// Re-derive boot state (cache flush, port re-selection) as a power cycle
  /// at the given clock value would.
  void reboot(std::uint32_t boot_unix_seconds) {
    upstream_socks_.clear();
    core_.reboot(boot_unix_seconds, detail::monotonic_ms());
    ensure_boot_socket();
  }

  /// Services every readable socket once; true if anything was handled.
  bool poll_once(int timeout_ms) {
    std::vector<pollfd> fds;
    fds.push_back({client_sock_.fd(), POLLIN, 0});
    if (tcp_listen_fd_ >= 0) fds.push_back({tcp_listen_fd_, POLLIN, 0});
    std::vector<std::uint16_t> ports;  // parallel to fds from index base
    std::size_t base = fds.size();
    for (const auto& [port, sock] : upstream_socks_) {
      fds.push_back({sock.fd(), POLLIN, 0});
      ports.push_back(port);
    }
    int n = ::poll(fds.data(), fds.size(), timeout_ms);
    if (n <= 0) return false;

    bool handled = false;
    if (fds[0].revents & POLLIN) {
      while (auto pkt = client_sock_.recv_now()) {
        run_actions(core_.handle_client_query(pkt->first, Transport::udp,
                                              std::move(pkt->second),
                                              detail::monotonic_ms()));
        handled = true;
      }
    }
    if (tcp_listen_fd_ >= 0 && (fds[1].revents & POLLIN)) {
      accept_tcp();
      handled = true;
    }
    for (std::size_t i = base; i < fds.size(); ++i) {
      if (!(fds[i].revents & POLLIN)) continue;
      std::uint16_t port = ports[i - base];
      auto it = upstream_socks_.find(port);
      if (it == upstream_socks_.end()) continue;
      while (auto pkt = it->second.recv_now()) {
        run_actions(core_.handle_upstream_response(pkt->first, port, std::move(pkt->second),
                                                   detail::monotonic_ms()));
        handled = true;
        // The action list may have closed and erased this socket.
        it = upstream_socks_.find(port);
        if (it == upstream_socks_.end()) break;
      }
    }
    return handled;
  }

  void run(const std::atomic<bool>& stop, int slice_ms = 50) {
    while (!stop.load(std::memory_order_relaxed)) poll_once(slice_ms);
  }

private:
  void ensure_boot_socket() {
    if (auto port = core_.boot_port())
      upstream_socks_.emplace(*port, UdpSocket(Endpoint{opt_.listen.addr, *port}));
  }

  /// Sockets for per-query ports: the state machine picks the port number
  /// used as its pending-query key; the OS socket binds to exactly that port
  /// so the upstream (and its tap) observe the policy's choice.
  UdpSocket& socket_for_port(std::uint16_t port) {
    auto it = upstream_socks_.find(port);
    if (it == upstream_socks_.end())
      it = upstream_socks_.emplace(port, UdpSocket(Endpoint{opt_.listen.addr, port})).first;
    return it->second;
  }

  void run_actions(std::vector<ForwarderAction> actions) {
    for (ForwarderAction& action : actions) {
      if (auto* up = std::get_if<SendUpstream>(&action)) {
        socket_for_port(up->src_port).send_to(opt_.upstream, up->bytes);
      } else if (auto* cl = std::get_if<SendToClient>(&action)) {
        if (cl->transport == Transport::udp) {
          client_sock_.send_to(cl->client, cl->bytes);
        } else if (auto conn = tcp_conns_.find(cl->client); conn != tcp_conns_.end()) {
          std::vector<std::uint8_t> framed;
          framed.push_back(static_cast<std::uint8_t>(cl->bytes.size() >> 8));
          framed.push_back(static_cast<std::uint8_t>(cl->bytes.size() & 0xFF));
          framed.insert(framed.end(), cl->bytes.begin(), cl->bytes.end());
          (void)!::write(conn->second, framed.data(), framed.size());
          ::close(conn->second);
          tcp_conns_.erase(conn);
        }
      } else if (auto* closed = std::get_if<PortClosed>(&action)) {
        upstream_socks_.erase(closed->port);
      }
      // Drop: nothing to execute.
    }
  }

  void accept_tcp() {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    int conn = ::accept(tcp_listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    if (conn < 0) return;
    Endpoint peer = detail::from_sockaddr(sa);
    std::vector<std::uint8_t> payload;
    if (!read_framed(conn, payload)) {
      ::close(conn);
      return;
    }
    tcp_conns_[peer] = conn;
    run_actions(core_.handle_client_query(peer, Transport::tcp, std::move(payload),
                                          detail::monotonic_ms()));
    // If nothing answered synchronously, the connection stays open until the
    // upstream response arrives and run_actions() writes and closes it.
  }

  static bool read_framed(int fd, std::vector<std::uint8_t>& out, int deadline_ms = 2000) {
    auto read_exact = [&](std::uint8_t* dst, std::size_t want) {
      std::size_t got = 0;
      std::uint64_t end = detail::monotonic_ms() + static_cast<std::uint64_t>(deadline_ms);
      while (got < want) {
        pollfd pfd{fd, POLLIN, 0};
        std::uint64_t now = detail::monotonic_ms();
        if (now >= end || ::poll(&pfd, 1, static_cast<int>(end - now)) <= 0) return false;
        ssize_t n = ::read(fd, dst + got, want - got);
        if (n <= 0) return false;
        got += static_cast<std::size_t>(n);
      }
      return true;
    };
    std::uint8_t hdr[2];
    if (!read_exact(hdr, 2)) return false;
    std::size_t len = (static_cast<std::size_t>(hdr[0]) << 8) | hdr[1];
    out.resize(len);
    return len == 0 || read_exact(out.data(), len);
  }

  LiveForwarderOptions opt_;
  Forwarder core_;
  UdpSocket client_sock_;
  int tcp_listen_fd_ = -1;
  std::map<std::uint16_t, UdpSocket> upstream_socks_;
  std::map<Endpoint, int> tcp_conns_;
};

// ---------------------------------------------------------------------------
// Scanner transport over real sockets, for probing a live endpoint. The tap,
// when given, is the JSON-lines file a LiveUpstream writes.
// ---------------------------------------------------------------------------

struct UdpScanTransportOptions {
  int timeout_ms = 3000;
  int retransmits = 1;
  std::string tap_path;  // empty = no upstream visibility
};

class UdpScanTransport : public ScanTransport {
public:
  explicit UdpScanTransport(Endpoint server, UdpScanTransportOptions opt = {})
      : server_(server), opt_(std::move(opt)) {}

  WireReply exchange(const std::vector<std::uint8_t>& query_wire, Transport transport) override {
    WireReply rep;
    if (transport == Transport::tcp) {
      exchange_tcp(query_wire, rep);
      return rep;
    }
    UdpSocket sock(Endpoint{server_.addr == 0x7F000001 ? 0x7F000001u : 0u, 0});
    for (int attempt = 0; attempt <= opt_.retransmits && !rep.replied; ++attempt) {
      sock.send_to(server_, query_wire);
      if (auto pkt = sock.recv(opt_.timeout_ms)) {
        rep.replied = true;
        rep.raw = std::move(pkt->second);
      }
    }
    return rep;
  }

  bool tap_available() const override { return !opt_.tap_path.empty(); }

  std::vector<TapObservation> drain_tap() override {
    std::vector<TapObservation> fresh;
    if (opt_.tap_path.empty()) return fresh;
    std::ifstream in(opt_.tap_path);
    if (!in) return fresh;
    in.seekg(static_cast<std::streamoff>(tap_offset_));
    std::string line;
    while (std::getline(in, line)) {
      tap_offset_ += line.size() + 1;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded()) continue;
      TapObservation obs;
      obs.time_ms = j.value("time_ms", std::uint64_t{0});
      obs.txid = j.value("txid", std::uint16_t{0});
      obs.src_port = j.value("src_port", std::uint16_t{0});
      obs.qname = name_of(j.value("qname", std::string{}));
      obs.qtype = static_cast<RrType>(j.value("qtype", std::uint16_t{1}));
      obs.cd = j.value("cd", false);
      fresh.push_back(std::move(obs));
    }
    return fresh;
  }

  bool reboot_available() const override { return false; }
  bool reboot() override { return false; }

private:
  void exchange_tcp(const std::vector<std::uint8_t>& query_wire, WireReply& rep) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return;
    sockaddr_in sa = detail::to_sockaddr(server_);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
      ::close(fd);
      return;
    }
    std::vector<std::uint8_t> framed;
    framed.push_back(static_cast<std::uint8_t>(query_wire.size() >> 8));
    framed.push_back(static_cast<std::uint8_t>(query_wire.size() & 0xFF));
    framed.insert(framed.end(), query_wire.begin(), query_wire.end());
    if (::write(fd, framed.data(), framed.size()) !=
        static_cast<ssize_t>(framed.size())) {
      ::close(fd);
      return;
    }
    std::uint8_t hdr[2];
    if (read_exact(fd, hdr, 2, opt_.timeout_ms)) {
      std::size_t len = (static_cast<std::size_t>(hdr[0]) << 8) | hdr[1];
      std::vector<std::uint8_t> buf(len);
      if (len == 0 || read_exact(fd, buf.data(), len, opt_.timeout_ms)) {
        rep.replied = true;
        rep.raw = std::move(buf);
      }
    }
    ::close(fd);
  }

  static bool read_exact(int fd, std::uint8_t* dst, std::size_t want, int deadline_ms) {
    std::size_t got = 0;
    std::uint64_t end = detail::monotonic_ms() + static_cast<std::uint64_t>(deadline_ms);
    while (got < want) {
      pollfd pfd{fd, POLLIN, 0};
      std::uint64_t now = detail::monotonic_ms();
      if (now >= end || ::poll(&pfd, 1, static_cast<int>(end - now)) <= 0) return false;
      ssize_t n = ::read(fd, dst + got, want - got);
      if (n <= 0) return false;
      got += static_cast<std::size_t>(n);
    }
    return true;
  }

  Endpoint server_;
  UdpScanTransportOptions opt_;
  std::size_t tap_offset_ = 0;
};

}  // namespace dnslab
