#pragma once

#include <memory>
#include <string>
#include <thread>

#include "pbac/engine.hpp"

namespace pbac {

// Service configuration; every key can be overridden by a PBAC_* environment
// variable (PBAC_LISTEN_ADDRESS, PBAC_PORT, PBAC_TTL_SWEEP_INTERVAL_S,
// PBAC_RULE_SET_VERSION, PBAC_LOG_PATH, PBAC_SNAPSHOT_PATH,
// PBAC_TERNARY_ENABLED, PBAC_ENFORCE_CAPABILITIES, PBAC_INITIAL_GRAPH).
struct ServiceConfig {
    std::string listen_address = "127.0.0.1";
    int port = 8311;  // 0: pick any free port
    int ttl_sweep_interval_s = 0;  // 0 disables the timer; decisions still sweep lazily
    std::string rule_set_version;
    std::string log_path;
    std::string snapshot_path;
    bool ternary_enabled = false;
    bool enforce_capabilities = true;
    std::string initial_graph;  // path to a graph file
    int snapshot_every = 100;   // mutations between snapshots

    static ServiceConfig from_file(const std::string& path);
    static ServiceConfig from_json_text(const std::string& text);
    void apply_env_overrides();
};

// HTTP façade over a PdpEngine.
//
//   POST   /pap/facts        assert one fact (or a list under "facts")
//   DELETE /pap/facts        retract one fact
//   GET    /pap/graph        current graph (DSL text) and version
//   POST   /pdp/decision     decide a request; persists before responding
//   POST   /pdp/processed    Fig-7 edge e: the PEP reports processing happened
//   GET    /audit/report     full audit export
//   GET    /audit/subject/X  information-request report for subject X
class PdpService {
public:
    explicit PdpService(ServiceConfig cfg, PurposeGraph initial = {});
    ~PdpService();

    PdpService(const PdpService&) = delete;
    PdpService& operator=(const PdpService&) = delete;

    // Binds and serves on a background thread; returns the bound port.
    int start();
    void stop();
    bool running() const;

    PdpEngine& engine();
    const ServiceConfig& config() const;

    // Serves until interrupted (CLI `serve`).
    int run_blocking();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pbac
