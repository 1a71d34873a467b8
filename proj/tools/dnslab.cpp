// Command-line front end for the DNS-forwarder security laboratory.
//
// Subcommands:
//   attack          run one attack scenario against a device profile
//   sim             same as attack, but also prints the packet transcript
//   scan            probe a target (simulated or live) and print a report
//   ttl-survey      bucket the A-record TTLs of a list of domains
//   serve-ns        run the upstream recursive + authority on a live socket
//   serve-forwarder run a device profile as a live forwarder
//
// Exit codes: 64 for usage errors; attack/sim exit 0 on scenario success and
// 1 on failure; scan exits 0 safe, 1 vulnerable, 2 inconclusive or error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnslab/dnslab.hpp"

using namespace dnslab;

namespace {

constexpr int kUsageError = 64;

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

ForwarderProfile profile_by_name_or_file(const std::string& spec) {
  for (const std::string& name : builtin_profile_names())
    if (name == spec) return builtin_profile(spec);
  std::ifstream in(spec);
  if (!in) throw CLI::ValidationError("--profile", "no built-in profile or readable file '" +
                                                       spec + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_profile(buf.str());
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--profile", std::string(e.what()));
  }
}

std::string wall_clock_stamp() {
  char buf[32];
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_outcome(const std::string& scenario, const std::string& profile_name,
                   std::uint64_t seed, const AttackOutcome& out, bool with_transcript) {
  std::printf("scenario:  %s\n", scenario.c_str());
  std::printf("profile:   %s\n", profile_name.c_str());
  std::printf("seed:      %llu\n", static_cast<unsigned long long>(seed));
  std::printf("outcome:   %s\n", out.success ? "success" : "failure");
  std::printf("packets:   %llu spoofed\n",
              static_cast<unsigned long long>(out.packets_sent_by_attacker));
  if (out.poisoned_mapping)
    std::printf("poisoned:  %s -> %s\n", out.poisoned_mapping->first.c_str(),
                out.poisoned_mapping->second.c_str());
  std::printf("persisted: %s\n", out.cache_persisted ? "yes (honest requery still forged)"
                                                     : "no");
  if (!out.notes.empty()) std::printf("notes:     %s\n", out.notes.c_str());
  if (!out.success && !out.failure_reason.empty())
    std::printf("reason:    %s\n", out.failure_reason.c_str());
  if (with_transcript && !out.transcript.empty()) {
    std::printf("transcript:\n");
    for (const std::string& line : out.transcript) std::printf("  %s\n", line.c_str());
  }
}

int run_attack(const std::string& scenario, const std::string& profile_spec, std::uint64_t seed,
               std::uint32_t budget, bool with_transcript) {
  ForwarderProfile profile = profile_by_name_or_file(profile_spec);
  AttackOutcome out;
  if (scenario == "xdri-cname") {
    out = run_xdri_cname_chase(profile, seed);
  } else if (scenario == "xdri-cname-dot") {
    ChaseOptions opt;
    opt.dot_variant = true;
    out = run_xdri_cname_chase(profile, seed, opt);
  } else if (scenario == "txid-known") {
    SpoofOptions opt;
    opt.budget = budget;
    out = run_txid_known_attack(profile, seed, opt);
  } else if (scenario == "static-port") {
    SpoofOptions opt;
    opt.budget = budget;
    out = run_static_port_attack(profile, seed, opt);
  } else if (scenario == "blind-spoof") {
    SpoofOptions opt;
    opt.budget = budget;
    out = run_blind_spoof_attack(profile, seed, opt);
  } else if (scenario == "cd-disable") {
    out = run_cd_disable_attack(profile, seed);
  } else if (scenario == "ttl-survey") {
    TtlSurvey s = run_ttl_survey(profile, seed, {5, 60, 120, 300, 600, 3600, 0});
    std::printf("cache lifetime survey for %s (upstream ttl -> observed ttl)\n",
                profile.name.c_str());
    for (const auto& [upstream, seen] : s.samples) {
      if (seen)
        std::printf("  %6u -> %u\n", upstream, *seen);
      else
        std::printf("  %6u -> (not served from cache)\n", upstream);
    }
    std::printf("buckets: <=60s %d, <=300s %d, >300s %d, uncached %d\n", s.le60, s.le300,
                s.gt300, s.not_cached);
    return 0;
  } else {
    throw CLI::ValidationError(
        "--scenario", "unknown scenario '" + scenario +
                          "' (expected xdri-cname, xdri-cname-dot, txid-known, static-port, "
                          "blind-spoof, cd-disable, or ttl-survey)");
  }
  print_outcome(scenario, profile.name, seed, out, with_transcript);
  return out.success ? 0 : 1;
}

int run_scan(const std::string& target, const std::string& tap, const std::string& report_path,
             std::uint64_t seed, bool allow_reboot) {
  ScanReport report;
  if (target.rfind("sim:", 0) == 0) {
    ForwarderProfile profile = profile_by_name_or_file(target.substr(4));
    ScanOptions opt;
    opt.seed = seed;
    opt.try_reboot = allow_reboot;
    opt.target_label = target;
    report = scan_simulated_profile(profile, seed, std::move(opt));
  } else if (target.rfind("udp:", 0) == 0) {
    auto ep = Endpoint::parse(target.substr(4));
    if (!ep) throw CLI::ValidationError("--target", "expected udp:<ipv4>:<port>");
    UdpScanTransportOptions topt;
    topt.tap_path = tap;
    UdpScanTransport io(*ep, std::move(topt));
    ScanOptions opt;
    opt.seed = seed;
    opt.try_reboot = false;
    opt.target_label = target;
    opt.started_at = wall_clock_stamp();
    Scanner scanner(io, std::move(opt));
    report = scanner.run();
  } else {
    throw CLI::ValidationError("--target",
                               "expected sim:<profile> or udp:<ipv4>:<port>, got '" + target +
                                   "'");
  }

  std::fputs(report_to_text(report).c_str(), stdout);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::fprintf(stderr, "cannot write report to %s\n", report_path.c_str());
      return 2;
    }
    out << report_to_json(report).dump(2) << "\n";
  }
  switch (report.overall()) {
    case Verdict::safe: return 0;
    case Verdict::vulnerable: return 1;
    case Verdict::inconclusive: return 2;
  }
  return 2;
}

int run_ttl_survey_cmd(const std::string& target, const std::vector<std::string>& domains,
                       std::uint64_t seed, bool as_json) {
  std::vector<DnsName> names;
  names.reserve(domains.size());
  for (const std::string& d : domains) names.push_back(name_of(d));

  TtlHistogram hist;
  if (target.rfind("sim:", 0) == 0) {
    ForwarderProfile profile = profile_by_name_or_file(target.substr(4));
    SimScanTransport io(profile, seed);
    hist = ttl_survey(names, io, seed);
  } else if (target.rfind("udp:", 0) == 0) {
    auto ep = Endpoint::parse(target.substr(4));
    if (!ep) throw CLI::ValidationError("--target", "expected udp:<ipv4>:<port>");
    UdpScanTransport io(*ep);
    hist = ttl_survey(names, io, seed);
  } else {
    throw CLI::ValidationError("--target",
                               "expected sim:<profile> or udp:<ipv4>:<port>, got '" + target +
                                   "'");
  }

  if (as_json) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& [domain, ttl] : hist.samples) {
      nlohmann::json s{{"domain", domain}};
      if (ttl)
        s["ttl"] = *ttl;
      else
        s["ttl"] = nullptr;
      samples.push_back(std::move(s));
    }
    nlohmann::json j{{"le60", hist.le60},
                     {"le300", hist.le300},
                     {"gt300", hist.gt300},
                     {"failures", hist.failures},
                     {"samples", std::move(samples)}};
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }
  std::printf("surveyed %zu domains via %s\n", hist.total(), target.c_str());
  for (const auto& [domain, ttl] : hist.samples) {
    if (ttl)
      std::printf("  %-40s ttl %u\n", domain.c_str(), *ttl);
    else
      std::printf("  %-40s (failed)\n", domain.c_str());
  }
  std::printf("  <=60s: %zu   <=300s: %zu   >300s: %zu   failed: %zu\n", hist.le60, hist.le300,
              hist.gt300, hist.failures);
  return 0;
}

int run_serve_ns(const std::string& listen, const std::string& zone_set,
                 const std::string& tap_log) {
  auto ep = Endpoint::parse(listen);
  if (!ep) throw CLI::ValidationError("--listen", "expected <ipv4>:<port>");
  LiveUpstreamOptions opt;
  opt.listen = *ep;
  opt.zone_set = zone_set;
  opt.tap_log = tap_log;
  LiveUpstream upstream(std::move(opt));
  std::printf("upstream recursive + authority listening on udp %s (zones: %s%s)\n",
              upstream.endpoint().to_string().c_str(), zone_set.c_str(),
              tap_log.empty() ? "" : (", tap -> " + tap_log).c_str());
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  upstream.run(g_stop);
  std::printf("served %llu queries\n",
              static_cast<unsigned long long>(upstream.queries_served()));
  return 0;
}

int run_serve_forwarder(const std::string& listen, const std::string& upstream_spec,
                        const std::string& profile_spec, std::uint64_t seed,
                        std::uint32_t boot_time) {
  auto lep = Endpoint::parse(listen);
  if (!lep) throw CLI::ValidationError("--listen", "expected <ipv4>:<port>");
  auto uep = Endpoint::parse(upstream_spec);
  if (!uep) throw CLI::ValidationError("--upstream", "expected <ipv4>:<port>");
  ForwarderProfile profile = profile_by_name_or_file(profile_spec);
  LiveForwarderOptions opt;
  opt.listen = *lep;
  opt.upstream = *uep;
  opt.boot_unix_seconds = boot_time;
  LiveForwarder fwd(profile, seed, std::move(opt));
  std::printf("forwarder profile '%s' listening on %s%s, upstream %s\n", profile.name.c_str(),
              fwd.endpoint().to_string().c_str(),
              profile.tcp_supported ? " (udp+tcp)" : " (udp only)",
              uep->to_string().c_str());
  if (auto port = fwd.core().boot_port())
    std::printf("upstream queries leave from port %u\n", static_cast<unsigned>(*port));
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  fwd.run(g_stop);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNS forwarder security laboratory"};
  app.require_subcommand(1);

  std::string profile_spec = "dproxy-like";
  std::string scenario = "xdri-cname";
  std::uint64_t seed = 1;
  std::uint32_t budget = 65536;

  CLI::App* attack = app.add_subcommand("attack", "run one attack scenario");
  attack->add_option("--profile", profile_spec, "built-in profile name or profile file");
  attack->add_option("--scenario", scenario,
                     "xdri-cname | xdri-cname-dot | txid-known | static-port | blind-spoof | "
                     "cd-disable | ttl-survey");
  attack->add_option("--seed", seed, "deterministic run seed");
  attack->add_option("--budget", budget, "spoofed-packet budget for forgery scenarios");

  CLI::App* sim = app.add_subcommand("sim", "run a scenario and print the packet transcript");
  sim->add_option("--profile", profile_spec, "built-in profile name or profile file");
  sim->add_option("--scenario", scenario, "scenario name, as for attack");
  sim->add_option("--seed", seed, "deterministic run seed");
  sim->add_option("--budget", budget, "spoofed-packet budget for forgery scenarios");

  std::string target = "sim:dproxy-like";
  std::string tap;
  std::string report_path;
  bool no_reboot = false;
  CLI::App* scan = app.add_subcommand("scan", "probe a target and print a weakness report");
  scan->add_option("--target", target, "sim:<profile> or udp:<ipv4>:<port>");
  scan->add_option("--tap", tap, "upstream tap file (JSON lines) for live targets");
  scan->add_option("--report", report_path, "also write the JSON report to this file");
  scan->add_option("--seed", seed, "probe randomization seed");
  scan->add_flag("--no-reboot", no_reboot, "skip the reboot probe on simulated targets");

  std::vector<std::string> domains;
  bool as_json = false;
  CLI::App* survey = app.add_subcommand("ttl-survey", "bucket A-record TTLs for domains");
  survey->add_option("--target", target, "sim:<profile> or udp:<ipv4>:<port>");
  survey->add_option("--seed", seed, "query txid seed");
  survey->add_flag("--json", as_json, "machine-readable output");
  survey->add_option("domains", domains, "domain names to survey")->required();

  std::string listen = "127.0.0.1:5302";
  std::string zone_set = "scan";
  std::string tap_log;
  CLI::App* serve_ns = app.add_subcommand("serve-ns", "run the live upstream endpoint");
  serve_ns->add_option("--listen", listen, "address:port to bind (udp)");
  serve_ns->add_option("--zones", zone_set, "scan | payload | chase | chase-dot | secure");
  serve_ns->add_option("--tap-log", tap_log, "append per-query JSON lines to this file");

  std::string fwd_listen = "127.0.0.1:5300";
  std::string upstream_spec = "127.0.0.1:5302";
  std::uint32_t boot_time = 0;
  CLI::App* serve_fwd = app.add_subcommand("serve-forwarder", "run a live device profile");
  serve_fwd->add_option("--listen", fwd_listen, "address:port to bind");
  serve_fwd->add_option("--upstream", upstream_spec, "upstream resolver address:port");
  serve_fwd->add_option("--profile", profile_spec, "built-in profile name or profile file");
  serve_fwd->add_option("--seed", seed, "rng seed for txid/port policies");
  serve_fwd->add_option("--boot-time", boot_time, "boot clock (unix seconds) for port seeding");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kUsageError;
  }

  try {
    if (attack->parsed()) return run_attack(scenario, profile_spec, seed, budget, false);
    if (sim->parsed()) return run_attack(scenario, profile_spec, seed, budget, true);
    if (scan->parsed()) return run_scan(target, tap, report_path, seed, !no_reboot);
    if (survey->parsed()) return run_ttl_survey_cmd(target, domains, seed, as_json);
    if (serve_ns->parsed()) return run_serve_ns(listen, zone_set, tap_log);
    if (serve_fwd->parsed())
      return run_serve_forwarder(fwd_listen, upstream_spec, profile_spec, seed, boot_time);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return kUsageError;
}
