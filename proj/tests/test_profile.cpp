#include <catch_amalgamated.hpp>

#include "dnslab/profile.hpp"

using namespace dnslab;

TEST_CASE("built-in behavior profiles round-trip through text") {
  REQUIRE(builtin_profile_names().size() == 5);
  for (const auto& name : builtin_profile_names()) {
    ForwarderProfile p = builtin_profile(name);
    std::string text = profile_to_text(p);
    ForwarderProfile back = parse_profile(text);
    CHECK(profile_to_text(back) == text);
  }
  CHECK_THROWS_AS(builtin_profile("no-such-device"), ProfileError);
}

TEST_CASE("profile text accepts comments and ignores blank lines") {
  ForwarderProfile p = parse_profile(
      "# a proxy-style box\n"
      "name = boxy\n"
      "\n"
      "cache_model = qname_addr_map\n"
      "decoder = naive\n"
      "txid_policy = forward_client\n"
      "port_policy = static\n"
      "static_port = 2053\n"
      "cd_policy = forward_and_cache\n"
      "tcp_supported = false\n"
      "edns_behavior = pass\n"
      "cname_merge = true\n");
  CHECK(p.name == "boxy");
  CHECK(p.cache_model == CacheModel::qname_addr_map);
  CHECK(p.static_port == 2053);
  CHECK(p.tcp_supported == false);
  CHECK(p.cname_merge == true);
}

TEST_CASE("unknown keys and bad values name their line") {
  try {
    parse_profile("name = x\nwhat_is_this = 1\n");
    FAIL("expected a parse error");
  } catch (const ProfileError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_profile("cache_model = hashtable\n"), ProfileError);
  CHECK_THROWS_AS(parse_profile("txid_policy = guess\n"), ProfileError);
}

TEST_CASE("profiles reject inconsistent combinations") {
  ForwarderProfile p = builtin_profile("dnsmasq-like");
  p.cache_model = CacheModel::qname_addr_map;  // map model needs the naive decoder
  CHECK_THROWS_AS(p.validate(), ProfileError);

  ForwarderProfile q = builtin_profile("dnrd-like");
  q.port_policy = PortPolicy::static_port;
  q.static_port = 80;  // below the ephemeral floor
  CHECK_THROWS_AS(q.validate(), ProfileError);
}
