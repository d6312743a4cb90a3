#include "pbac/service.hpp"

#include <atomic>
#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "pbac/dsl.hpp"
#include "pbac/graph_io.hpp"
#include "pbac/version.hpp"

namespace pbac {

using json = nlohmann::ordered_json;

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
}

bool truthy(const std::string& s) { return s == "1" || s == "true" || s == "yes" || s == "on"; }

}  // namespace

ServiceConfig ServiceConfig::from_json_text(const std::string& text) {
    ServiceConfig cfg;
    json j = json::parse(text);
    if (j.contains("listen_address")) cfg.listen_address = j["listen_address"].get<std::string>();
    if (j.contains("port")) cfg.port = j["port"].get<int>();
    if (j.contains("ttl_sweep_interval_s")) cfg.ttl_sweep_interval_s = j["ttl_sweep_interval_s"].get<int>();
    if (j.contains("rule_set_version")) cfg.rule_set_version = j["rule_set_version"].get<std::string>();
    if (j.contains("log_path")) cfg.log_path = j["log_path"].get<std::string>();
    if (j.contains("snapshot_path")) cfg.snapshot_path = j["snapshot_path"].get<std::string>();
    if (j.contains("ternary_enabled")) cfg.ternary_enabled = j["ternary_enabled"].get<bool>();
    if (j.contains("enforce_capabilities")) cfg.enforce_capabilities = j["enforce_capabilities"].get<bool>();
    if (j.contains("initial_graph")) cfg.initial_graph = j["initial_graph"].get<std::string>();
    if (j.contains("snapshot_every")) cfg.snapshot_every = j["snapshot_every"].get<int>();
    return cfg;
}

ServiceConfig ServiceConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    ServiceConfig cfg = from_json_text(buf.str());
    cfg.apply_env_overrides();
    return cfg;
}

void ServiceConfig::apply_env_overrides() {
    if (auto v = env("PBAC_LISTEN_ADDRESS")) listen_address = *v;
    if (auto v = env("PBAC_PORT")) port = std::stoi(*v);
    if (auto v = env("PBAC_TTL_SWEEP_INTERVAL_S")) ttl_sweep_interval_s = std::stoi(*v);
    if (auto v = env("PBAC_RULE_SET_VERSION")) rule_set_version = *v;
    if (auto v = env("PBAC_LOG_PATH")) log_path = *v;
    if (auto v = env("PBAC_SNAPSHOT_PATH")) snapshot_path = *v;
    if (auto v = env("PBAC_TERNARY_ENABLED")) ternary_enabled = truthy(*v);
    if (auto v = env("PBAC_ENFORCE_CAPABILITIES")) enforce_capabilities = truthy(*v);
    if (auto v = env("PBAC_INITIAL_GRAPH")) initial_graph = *v;
    if (auto v = env("PBAC_SNAPSHOT_EVERY")) snapshot_every = std::stoi(*v);
}

struct PdpService::Impl {
    ServiceConfig cfg;
    PdpEngine engine;
    httplib::Server server;
    std::thread server_thread;
    std::thread sweep_thread;
    std::atomic<bool> stopping{false};
    std::condition_variable sweep_cv;
    std::mutex sweep_mu;
    std::atomic<int> mutations_since_snapshot{0};
    int bound_port = 0;

    Impl(ServiceConfig c, PurposeGraph initial)
        : cfg(std::move(c)),
          engine(EngineOptions{cfg.rule_set_version.empty() ? kRuleSetVersion
                                                            : cfg.rule_set_version,
                               cfg.enforce_capabilities, cfg.ternary_enabled, nullptr,
                               cfg.log_path},
                 std::move(initial)) {
        routes();
    }

    void snapshot_if_due() {
        if (cfg.snapshot_path.empty() || cfg.snapshot_every <= 0) return;
        if (++mutations_since_snapshot < cfg.snapshot_every) return;
        mutations_since_snapshot = 0;
        write_snapshot();
    }

    void write_snapshot() {
        if (cfg.snapshot_path.empty()) return;
        auto snap = engine.snapshot();
        std::ofstream out(cfg.snapshot_path, std::ios::trunc);
        out << "// version " << snap->version() << "\n" << save_graph_text(*snap);
    }

    static void reply_error(httplib::Response& res, int status, const std::string& code,
                            const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
    }

    // Maps engine exceptions onto the wire protocol.
    template <typename Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const MalformedRequest& e) {
            reply_error(res, 400, "malformed-request", e.what());
        } catch (const MalformedFact& e) {
            reply_error(res, 400, "malformed-fact", e.what());
        } catch (const SyntaxError& e) {
            reply_error(res, 400, "syntax-error", e.what());
        } catch (const UnknownPredicate& e) {
            reply_error(res, 400, "unknown-predicate", e.what());
        } catch (const CapabilityViolation& e) {
            reply_error(res, 403, "capability-violation", e.what());
        } catch (const UnknownRequest& e) {
            reply_error(res, 404, "unknown-request", e.what());
        } catch (const NotPermitted& e) {
            reply_error(res, 409, "not-permitted", e.what());
        } catch (const AlreadyProcessed& e) {
            reply_error(res, 409, "already-processed", e.what());
        } catch (const FeatureDisabled& e) {
            reply_error(res, 403, "feature-disabled", e.what());
        } catch (const StoreUnavailable& e) {
            reply_error(res, 500, "store-unavailable", e.what());
        } catch (const json::exception& e) {
            reply_error(res, 400, "bad-payload", e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, "internal", e.what());
        }
    }

    Provenance provenance_from_body(const json& j, FactKind kind) {
        Provenance prov;
        prov.asserted_by = j.value("by", std::string("admin"));
        prov.capability = j.contains("capability")
                              ? capability_from_string(j["capability"].get<std::string>())
                                    .value_or(Capability::Qualify)
                              : default_capability_for(kind);
        // explicit asserted_at supports importing historical assertions
        prov.asserted_at = j.contains("asserted_at") ? j["asserted_at"].get<std::int64_t>()
                                                     : engine.options().clock();
        if (j.contains("expires_at")) prov.expires_at = j["expires_at"].get<std::int64_t>();
        if (j.contains("signature")) prov.signature = j["signature"].get<std::string>();
        return prov;
    }

    void routes() {
        server.Post("/pap/facts", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = json::parse(req.body);
                json facts = body.contains("facts") ? body["facts"] : json::array({body});
                json applied = json::array();
                for (const auto& item : facts) {
                    Fact fact = dsl::parse_fact(item.at("fact").get<std::string>());
                    Provenance prov = provenance_from_body(item, fact.kind);
                    MutationEvent ev = engine.admin_assert(fact, prov);
                    applied.push_back(json{{"fact", ev.fact.to_string()},
                                           {"version", ev.version_after}});
                    snapshot_if_due();
                }
                res.set_content(json{{"applied", applied},
                                     {"graph_version", engine.graph_version()}}.dump(),
                                "application/json");
            });
        });

        server.Delete("/pap/facts", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = json::parse(req.body);
                Fact fact = dsl::parse_fact(body.at("fact").get<std::string>());
                Provenance prov = provenance_from_body(body, fact.kind);
                auto ev = engine.admin_retract(fact, prov);
                if (ev) snapshot_if_due();
                res.set_content(json{{"retracted", ev.has_value()},
                                     {"graph_version", engine.graph_version()}}.dump(),
                                "application/json");
            });
        });

        server.Get("/pap/graph", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                auto snap = engine.snapshot();
                res.set_content(json{{"version", snap->version()},
                                     {"graph", save_graph_text(*snap)}}.dump(),
                                "application/json");
            });
        });

        server.Post("/pdp/decision", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = json::parse(req.body);
                std::string request_id = body.value("request_id", std::string{});
                if (request_id.empty()) request_id = engine.next_request_id();
                bool include_tree = body.value("include_tree", false);

                DecisionRecord rec;
                if (!body.contains("purpose")) {
                    // Triples take the ternary route; rejected unless enabled.
                    rec = engine.handle_decision_ternary(
                        body.at("actor").get<std::string>(), body.at("action").get<std::string>(),
                        body.at("asset").get<std::string>(), request_id);
                } else {
                    Request r{body.at("actor").get<std::string>(),
                              body.at("action").get<std::string>(),
                              body.at("purpose").get<std::string>(),
                              body.at("asset").get<std::string>(), request_id};
                    rec = engine.handle_decision(r);
                }

                json out;
                out["request_id"] = rec.request.request_id;
                out["decision"] = to_string(rec.decision.outcome);
                out["graph_version"] = rec.graph_version;
                out["rule_set_version"] = rec.rule_set_version;
                out["decided_at"] = rec.decision.decided_at;
                if (rec.decision.permitted()) {
                    if (include_tree)
                        out["tree"] = json::parse(serialize_tree(*rec.decision.tree));
                    else
                        out["tree_ref"] = rec.request.request_id;
                } else {
                    out["diagnosis"] = json::parse(serialize_diagnosis(*rec.decision.diagnosis));
                }
                res.set_content(out.dump(), "application/json");
            });
        });

        server.Post("/pdp/processed", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = json::parse(req.body);
                std::int64_t at = engine.handle_processed(body.at("request_id").get<std::string>());
                res.set_content(json{{"acknowledged", true}, {"processed_at", at}}.dump(),
                                "application/json");
            });
        });

        server.Get("/audit/report", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                res.set_content(serialize_audit_report(engine.audit_report()), "application/json");
            });
        });

        server.Get(R"(/audit/subject/([A-Za-z][A-Za-z0-9_-]*))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] {
                           res.set_content(
                               serialize_subject_report(engine.subject_report(req.matches[1])),
                               "application/json");
                       });
                   });
    }

    void start_sweeper() {
        if (cfg.ttl_sweep_interval_s <= 0) return;
        sweep_thread = std::thread([this] {
            std::unique_lock lk(sweep_mu);
            while (!stopping) {
                sweep_cv.wait_for(lk, std::chrono::seconds(cfg.ttl_sweep_interval_s));
                if (stopping) break;
                engine.sweep_now();
            }
        });
    }

    int start() {
        if (cfg.port == 0) {
            bound_port = server.bind_to_any_port(cfg.listen_address);
            if (bound_port <= 0) throw Error("cannot bind to " + cfg.listen_address);
        } else {
            if (!server.bind_to_port(cfg.listen_address, cfg.port))
                throw Error("cannot bind to " + cfg.listen_address + ":" +
                            std::to_string(cfg.port));
            bound_port = cfg.port;
        }
        server_thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
        start_sweeper();
        return bound_port;
    }

    void stop() {
        if (stopping.exchange(true)) return;
        sweep_cv.notify_all();
        server.stop();
        if (server_thread.joinable()) server_thread.join();
        if (sweep_thread.joinable()) sweep_thread.join();
        write_snapshot();
    }

    ~Impl() { stop(); }
};

PdpService::PdpService(ServiceConfig cfg, PurposeGraph initial) {
    if (!cfg.initial_graph.empty() && initial.size() == 0)
        initial = load_graph_file(cfg.initial_graph);
    impl_ = std::make_unique<Impl>(std::move(cfg), std::move(initial));
}

PdpService::~PdpService() = default;

int PdpService::start() { return impl_->start(); }
void PdpService::stop() { impl_->stop(); }
bool PdpService::running() const { return impl_->server.is_running(); }
PdpEngine& PdpService::engine() { return impl_->engine; }
const ServiceConfig& PdpService::config() const { return impl_->cfg; }

namespace {
// signal handlers may only poke the listening socket; cleanup happens on the
// main thread once the server loop returns
std::atomic<httplib::Server*> g_blocking_server{nullptr};
}

int PdpService::run_blocking() {
    int port = start();
    std::cout << "pbac pdp-service listening on " << impl_->cfg.listen_address << ":" << port
              << " (rule set " << impl_->engine.options().rule_set_version << ")" << std::endl;
    g_blocking_server = &impl_->server;
    std::signal(SIGINT, [](int) {
        if (httplib::Server* s = g_blocking_server.exchange(nullptr)) s->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (httplib::Server* s = g_blocking_server.exchange(nullptr)) s->stop();
    });
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
    g_blocking_server = nullptr;
    stop();  // flush the final snapshot on a clean shutdown
    return 0;
}

}  // namespace pbac
