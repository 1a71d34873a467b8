#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "dnslab/message.hpp"

namespace dnslab {

enum class Transport { udp, tcp };

inline const char* to_string(Transport t) { return t == Transport::udp ? "udp" : "tcp"; }

struct Endpoint {
  std::uint32_t addr = 0;
  std::uint16_t port = 0;

  auto operator<=>(const Endpoint&) const = default;

  std::string to_string() const { return ipv4_to_string(addr) + ":" + std::to_string(port); }

  static std::optional<Endpoint> parse(std::string_view s) {
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto a = ipv4_from_string(s.substr(0, colon));
    if (!a) return std::nullopt;
    std::uint32_t port = 0;
    for (char c : s.substr(colon + 1)) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    return Endpoint{*a, static_cast<std::uint16_t>(port)};
  }
};

}  // namespace dnslab
