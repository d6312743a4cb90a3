#include "pbac/sim.hpp"

#include <algorithm>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "pbac/service.hpp"

namespace pbac::sim {

using json = nlohmann::ordered_json;

const char* to_string(Archetype a) {
    switch (a) {
        case Archetype::NoDelegation: return "NoDelegation";
        case Archetype::DelegatedAction: return "DelegatedAction";
        case Archetype::DelegatedProcessing: return "DelegatedProcessing";
        case Archetype::DelegatedCollection: return "DelegatedCollection";
        case Archetype::Distributed: return "Distributed";
        case Archetype::IndependentControllers: return "IndependentControllers";
    }
    return "?";
}

const char* to_string(AdminRole r) {
    switch (r) {
        case AdminRole::Controller: return "Controller";
        case AdminRole::Collector: return "Collector";
        case AdminRole::Performer: return "Performer";
    }
    return "?";
}

const char* to_string(EnforcementRole r) {
    switch (r) {
        case EnforcementRole::PEP: return "PEP";
        case EnforcementRole::PDP: return "PDP";
        case EnforcementRole::PAP: return "PAP";
    }
    return "?";
}

const char* to_string(Governance g) {
    return g == Governance::SelfGoverned ? "SelfGoverned" : "IntermediaryGoverned";
}

std::optional<Archetype> archetype_from_string(const std::string& s) {
    for (auto a : {Archetype::NoDelegation, Archetype::DelegatedAction,
                   Archetype::DelegatedProcessing, Archetype::DelegatedCollection,
                   Archetype::Distributed, Archetype::IndependentControllers})
        if (s == to_string(a)) return a;
    return std::nullopt;
}

std::optional<Governance> governance_from_string(const std::string& s) {
    for (auto g : {Governance::SelfGoverned, Governance::IntermediaryGoverned})
        if (s == to_string(g)) return g;
    return std::nullopt;
}

const char* to_string(MsgEdge e) {
    switch (e) {
        case MsgEdge::A: return "a";
        case MsgEdge::B: return "b";
        case MsgEdge::C: return "c";
        case MsgEdge::D: return "d";
        case MsgEdge::E: return "e";
    }
    return "?";
}

int archetype_org_count(Archetype a) {
    switch (a) {
        case Archetype::NoDelegation: return 1;
        case Archetype::DelegatedAction:
        case Archetype::DelegatedProcessing:
        case Archetype::DelegatedCollection:
        case Archetype::IndependentControllers: return 2;
        case Archetype::Distributed: return 3;
    }
    return 0;
}

std::vector<std::set<AdminRole>> archetype_roles(Archetype a) {
    using R = AdminRole;
    switch (a) {
        case Archetype::NoDelegation:
            return {{R::Controller, R::Collector, R::Performer}};
        case Archetype::DelegatedAction:
            return {{R::Controller, R::Collector}, {R::Performer}};
        case Archetype::DelegatedProcessing:
            return {{R::Controller}, {R::Collector, R::Performer}};
        case Archetype::DelegatedCollection:
            return {{R::Controller, R::Performer}, {R::Collector}};
        case Archetype::Distributed:
            return {{R::Controller}, {R::Collector}, {R::Performer}};
        case Archetype::IndependentControllers:
            return {{R::Controller, R::Collector}, {R::Controller, R::Performer}};
    }
    return {};
}

std::set<Capability> capabilities_for(const std::set<AdminRole>& roles) {
    std::set<Capability> caps;
    for (AdminRole r : roles) {
        switch (r) {
            case AdminRole::Controller:
                caps.insert(Capability::Control);
                caps.insert(Capability::Qualify);
                // controllers facilitate consent: they collect it from
                // subjects and relay it into the purpose graph
                caps.insert(Capability::Consent);
                break;
            case AdminRole::Collector:
                caps.insert(Capability::Collect);
                caps.insert(Capability::Perform);
                break;
            case AdminRole::Performer:
                caps.insert(Capability::Perform);
                break;
        }
    }
    return caps;
}

const TopologyNode* Topology::find(const Atom& org) const {
    for (const auto& n : nodes)
        if (n.org == org) return &n;
    return nullptr;
}

const Wiring* Topology::wiring_for(const Atom& org) const {
    for (const auto& w : wiring)
        if (w.org == org) return &w;
    return nullptr;
}

Topology build_topology(Archetype a, Governance g, const std::vector<Atom>& orgs) {
    if (static_cast<int>(orgs.size()) != archetype_org_count(a))
        throw OrgCountMismatch(std::string(to_string(a)) + " takes " +
                               std::to_string(archetype_org_count(a)) + " organisations, got " +
                               std::to_string(orgs.size()));

    Topology t;
    t.archetype = a;
    t.governance = g;

    std::vector<std::set<AdminRole>> roles = archetype_roles(a);
    for (std::size_t i = 0; i < orgs.size(); ++i) {
        TopologyNode node{orgs[i], roles[i], {}};
        // Collecting and performing are both processing: such nodes enforce
        // their own actions through a local PEP.
        if (node.admin_roles.count(AdminRole::Collector) ||
            node.admin_roles.count(AdminRole::Performer))
            node.enforcement_roles.insert(EnforcementRole::PEP);
        if (g == Governance::SelfGoverned && node.admin_roles.count(AdminRole::Controller)) {
            node.enforcement_roles.insert(EnforcementRole::PDP);
            node.enforcement_roles.insert(EnforcementRole::PAP);
        }
        t.nodes.push_back(std::move(node));
    }
    if (g == Governance::IntermediaryGoverned)
        t.nodes.push_back({"Intermediary", {}, {EnforcementRole::PDP, EnforcementRole::PAP}});

    if (g == Governance::IntermediaryGoverned) {
        for (const auto& n : t.nodes) t.wiring.push_back({n.org, "Intermediary", "Intermediary"});
    } else if (a == Archetype::IndependentControllers) {
        // disjoint stacks, no cross-controller communication
        for (const auto& n : t.nodes) t.wiring.push_back({n.org, n.org, n.org});
    } else {
        const Atom& controller = orgs[0];  // Table-2 order: controller org first
        for (const auto& n : t.nodes) t.wiring.push_back({n.org, controller, controller});
    }
    return t;
}

std::vector<std::string> verify_capability_assignment(const Topology& t) {
    std::vector<std::string> violations;
    auto flag = [&violations](const std::string& msg) { violations.push_back(msg); };

    std::vector<const TopologyNode*> orgs;  // nodes with admin roles (the intermediary has none)
    for (const auto& n : t.nodes)
        if (!n.admin_roles.empty()) orgs.push_back(&n);

    // Table 2: role sets must match the archetype, organisation by organisation.
    std::vector<std::set<AdminRole>> expected = archetype_roles(t.archetype);
    if (orgs.size() != expected.size()) {
        flag("organisation count does not match archetype " +
             std::string(to_string(t.archetype)));
    } else {
        for (std::size_t i = 0; i < orgs.size(); ++i)
            if (orgs[i]->admin_roles != expected[i])
                flag("organisation '" + orgs[i]->org + "' does not carry the " +
                     to_string(t.archetype) + " roles for position " + std::to_string(i + 1));
    }

    for (const auto& n : t.nodes) {
        bool holds_data = n.admin_roles.count(AdminRole::Collector) != 0;
        bool performs = n.admin_roles.count(AdminRole::Performer) != 0;
        bool is_controller = n.admin_roles.count(AdminRole::Controller) != 0;

        if ((holds_data || performs) && !n.enforcement_roles.count(EnforcementRole::PEP))
            flag("organisation '" + n.org + "' processes data but hosts no PEP");

        if (!is_controller && !n.admin_roles.empty() &&
            (n.enforcement_roles.count(EnforcementRole::PDP) ||
             n.enforcement_roles.count(EnforcementRole::PAP)))
            flag("organisation '" + n.org +
                 "' is a processor and must have its actions authorised by an external "
                 "decision-making process, not host a PDP/PAP");

        if (t.governance == Governance::SelfGoverned && is_controller &&
            (!n.enforcement_roles.count(EnforcementRole::PDP) ||
             !n.enforcement_roles.count(EnforcementRole::PAP)))
            flag("self-governed controller '" + n.org + "' must host a PDP and a PAP");

        const Wiring* w = t.wiring_for(n.org);
        if (!w) {
            flag("organisation '" + n.org + "' has no PDP/PAP wiring");
            continue;
        }
        const TopologyNode* pdp = t.find(w->pdp_org);
        const TopologyNode* pap = t.find(w->pap_org);
        if (!pdp || !pdp->enforcement_roles.count(EnforcementRole::PDP))
            flag("organisation '" + n.org + "' is wired to '" + w->pdp_org +
                 "' which hosts no PDP");
        if (!pap || !pap->enforcement_roles.count(EnforcementRole::PAP))
            flag("organisation '" + n.org + "' is wired to '" + w->pap_org +
                 "' which hosts no PAP");

        // Independent controllers run disjoint stacks.
        if (t.archetype == Archetype::IndependentControllers &&
            t.governance == Governance::SelfGoverned && !n.admin_roles.empty() &&
            (w->pdp_org != n.org || w->pap_org != n.org))
            flag("independent controller '" + n.org + "' must not consult another "
                 "controller's PDP/PAP");
    }

    if (t.governance == Governance::IntermediaryGoverned) {
        bool found = false;
        for (const auto& n : t.nodes)
            if (n.admin_roles.empty() && n.enforcement_roles.count(EnforcementRole::PDP) &&
                n.enforcement_roles.count(EnforcementRole::PAP))
                found = true;
        if (!found) flag("intermediary-governed topology lacks an intermediary PDP+PAP node");
    }

    return violations;
}

std::string SimTrace::to_records() const {
    std::string out;
    for (const auto& m : messages) {
        json j;
        j["seq"] = m.seq;
        j["edge"] = to_string(m.edge);
        j["from"] = m.from_org;
        j["to"] = m.to_org;
        j["payload"] = m.payload;
        out += j.dump();
        out += '\n';
    }
    for (const auto& [org, trace] : org_traces) {
        for (const auto& e : trace.entries) {
            json j;
            j["org"] = org;
            j["statement"] = e.statement;
            j["outcome"] = dsl::to_string(e.outcome);
            out += j.dump();
            out += '\n';
        }
    }
    for (const auto& d : decision_sequence) {
        out += json{{"decision", d}}.dump();
        out += '\n';
    }
    return out;
}

bool SimTrace::has_cross_traffic(const Atom& org_a, const Atom& org_b) const {
    for (const auto& m : messages)
        if ((m.from_org == org_a && m.to_org == org_b) ||
            (m.from_org == org_b && m.to_org == org_a))
            return true;
    return false;
}

namespace {

// One decision authority (PDP+PAP pair). In-process it is a PdpEngine; in
// loopback mode it is a real pdp-service reached over 127.0.0.1.
struct Authority {
    Atom org;
    std::unique_ptr<PdpEngine> engine;
    std::unique_ptr<PdpService> service;
    int port = 0;

    std::uint64_t graph_version() {
        if (engine) return engine->graph_version();
        httplib::Client cli("127.0.0.1", port);
        auto res = cli.Get("/pap/graph");
        return res ? json::parse(res->body).at("version").get<std::uint64_t>() : 0;
    }

    void assert_fact(const Fact& f, const Atom& by, const std::optional<std::int64_t>& exp) {
        if (engine) {
            Provenance prov{by, default_capability_for(f.kind), engine->options().clock()};
            prov.expires_at = exp;
            engine->admin_assert(f, prov);
            return;
        }
        httplib::Client cli("127.0.0.1", port);
        json body{{"fact", f.to_string()},
                  {"by", by},
                  {"capability", to_string(default_capability_for(f.kind))}};
        if (exp) body["expires_at"] = *exp;
        auto res = cli.Post("/pap/facts", body.dump(), "application/json");
        if (!res || res->status != 200)
            throw WiringError("PAP call failed for '" + f.to_string() + "'");
    }

    void retract_fact(const Fact& f, const Atom& by) {
        if (engine) {
            Provenance prov{by, default_capability_for(f.kind), engine->options().clock()};
            engine->admin_retract(f, prov);
            return;
        }
        httplib::Client cli("127.0.0.1", port);
        json body{{"fact", f.to_string()},
                  {"by", by},
                  {"capability", to_string(default_capability_for(f.kind))}};
        auto res = cli.Delete("/pap/facts", body.dump(), "application/json");
        if (!res || res->status != 200)
            throw WiringError("PAP retract failed for '" + f.to_string() + "'");
    }

    // Returns (permit, request_id).
    std::pair<bool, std::string> decide(const std::array<Atom, 4>& args) {
        if (engine) {
            DecisionRecord rec = engine->handle_decision(
                {args[0], args[1], args[2], args[3], engine->next_request_id()});
            return {rec.decision.permitted(), rec.request.request_id};
        }
        httplib::Client cli("127.0.0.1", port);
        json body{{"actor", args[0]}, {"action", args[1]}, {"purpose", args[2]},
                  {"asset", args[3]}};
        auto res = cli.Post("/pdp/decision", body.dump(), "application/json");
        if (!res || res->status != 200) throw WiringError("PDP call failed");
        json j = json::parse(res->body);
        return {j.at("decision").get<std::string>() == "permit",
                j.at("request_id").get<std::string>()};
    }

    void processed(const std::string& request_id) {
        if (engine) {
            engine->handle_processed(request_id);
            return;
        }
        httplib::Client cli("127.0.0.1", port);
        auto res = cli.Post("/pdp/processed", json{{"request_id", request_id}}.dump(),
                            "application/json");
        if (!res || res->status != 200) throw WiringError("processed notice failed");
    }
};

std::string tuple_payload(const std::array<Atom, 4>& a) {
    return "(" + a[0] + "," + a[1] + "," + a[2] + "," + a[3] + ")";
}

}  // namespace

SimTrace run_scenario(const Topology& t, const std::map<Atom, dsl::Program>& scripts,
                      const SimOptions& opts) {
    SimTrace trace;
    int seq = 0;
    auto log = [&](const Atom& from, const Atom& to, MsgEdge edge, const std::string& payload) {
        trace.messages.push_back({++seq, from, to, edge, payload});
    };

    // One authority per PDP+PAP-hosting node.
    std::map<Atom, Authority> authorities;
    for (const auto& n : t.nodes) {
        if (!n.enforcement_roles.count(EnforcementRole::PDP)) continue;
        Authority auth;
        auth.org = n.org;
        if (opts.loopback) {
            ServiceConfig cfg;
            cfg.port = 0;
            cfg.rule_set_version = opts.rule_set_version;
            cfg.enforce_capabilities = opts.enforce_capabilities;
            auth.service = std::make_unique<PdpService>(cfg);
            auth.port = auth.service->start();
        } else {
            EngineOptions eo;
            eo.rule_set_version = opts.rule_set_version;
            eo.enforce_capabilities = opts.enforce_capabilities;
            eo.clock = opts.clock;
            auth.engine = std::make_unique<PdpEngine>(std::move(eo));
        }
        authorities.emplace(n.org, std::move(auth));
    }

    // Requests made at each PEP, per the request/process protocol.
    std::map<Atom, std::vector<std::array<Atom, 4>>> pep_requests;

    for (const auto& node : t.nodes) {
        auto it = scripts.find(node.org);
        if (it == scripts.end()) continue;
        const Wiring* wiring = t.wiring_for(node.org);
        if (!wiring) throw WiringError("organisation '" + node.org + "' is not wired");
        Authority& pdp = authorities.at(wiring->pdp_org);
        const Atom& pap_org = wiring->pap_org;
        std::set<Capability> caps = capabilities_for(node.admin_roles);
        bool has_pep = node.enforcement_roles.count(EnforcementRole::PEP) != 0;

        dsl::Trace org_trace;
        for (const auto& stmt : it->second.statements) {
            if (std::holds_alternative<dsl::CommentStmt>(stmt)) continue;
            dsl::TraceEntry entry{dsl::Outcome::Ok, dsl::format_statement(stmt), ""};

            if (const auto* a = std::get_if<dsl::AssertStmt>(&stmt)) {
                Capability needed = default_capability_for(a->fact.kind);
                if (opts.enforce_capabilities && !caps.count(needed)) {
                    entry.outcome = dsl::Outcome::Violation;
                    entry.detail = "organisation '" + node.org + "' lacks the " +
                                   std::string(to_string(needed)) + " capability for " +
                                   a->fact.to_string();
                } else {
                    pdp.assert_fact(a->fact, node.org,
                                    a->prov ? a->prov->exp : std::optional<std::int64_t>{});
                }
            } else if (const auto* r = std::get_if<dsl::RetractStmt>(&stmt)) {
                Capability needed = default_capability_for(r->fact.kind);
                if (opts.enforce_capabilities && !caps.count(needed)) {
                    entry.outcome = dsl::Outcome::Violation;
                    entry.detail = "organisation '" + node.org + "' lacks the " +
                                   std::string(to_string(needed)) + " capability";
                } else {
                    pdp.retract_fact(r->fact, node.org);
                }
            } else if (const auto* tr = std::get_if<dsl::TriggerStmt>(&stmt)) {
                if (!has_pep)
                    throw WiringError("organisation '" + node.org +
                                      "' triggers processing but hosts no PEP");
                if (tr->name == dsl::TriggerName::MakeRequest) {
                    pep_requests[node.org].push_back(tr->args);
                    log(node.org, node.org, MsgEdge::A, "request" + tuple_payload(tr->args));
                } else {
                    auto& made = pep_requests[node.org];
                    bool requested = std::find(made.begin(), made.end(), tr->args) != made.end();
                    bool permit = false;
                    if (requested) {
                        log(node.org, pdp.org, MsgEdge::B, "request" + tuple_payload(tr->args));
                        log(pap_org, pdp.org, MsgEdge::C,
                            "purpose-graph v" + std::to_string(pdp.graph_version()));
                        auto [ok, request_id] = pdp.decide(tr->args);
                        permit = ok;
                        log(pdp.org, node.org, MsgEdge::D, ok ? "permit" : "deny");
                        trace.decision_sequence.push_back(
                            std::string(ok ? "permit" : "deny") + " lawful-request" +
                            tuple_payload(tr->args));
                        if (ok) {
                            log(node.org, pdp.org, MsgEdge::E, "processed " + request_id);
                            pdp.processed(request_id);
                        }
                    }
                    entry.outcome = permit ? dsl::Outcome::Ok : dsl::Outcome::Violation;
                }
            } else if (const auto* q = std::get_if<dsl::QueryStmt>(&stmt)) {
                if (!has_pep)
                    throw WiringError("organisation '" + node.org +
                                      "' queries lawfulness but hosts no PEP");
                auto& made = pep_requests[node.org];
                bool requested = std::find(made.begin(), made.end(), q->args) != made.end();
                bool permit = false;
                if (requested) {
                    log(node.org, pdp.org, MsgEdge::B, "request" + tuple_payload(q->args));
                    log(pap_org, pdp.org, MsgEdge::C,
                        "purpose-graph v" + std::to_string(pdp.graph_version()));
                    auto [ok, request_id] = pdp.decide(q->args);
                    permit = ok;
                    log(pdp.org, node.org, MsgEdge::D, ok ? "permit" : "deny");
                    trace.decision_sequence.push_back(std::string(ok ? "permit" : "deny") +
                                                      " lawful-request" + tuple_payload(q->args));
                }
                entry.outcome = permit ? dsl::Outcome::QuerySuccess : dsl::Outcome::QueryFailure;
            }

            org_trace.entries.push_back(std::move(entry));
        }
        trace.org_traces[node.org] = std::move(org_trace);
    }

    for (auto& [org, auth] : authorities)
        if (auth.service) auth.service->stop();
    return trace;
}

TopologySpec parse_topology_config(const std::string& text) {
    TopologySpec spec;
    std::string cleaned;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        auto comment = line.find("//");
        if (comment != std::string::npos) line.erase(comment);
        cleaned += line;
        cleaned += ' ';
    }
    std::istringstream stmts(cleaned);
    for (std::string stmt; std::getline(stmts, stmt, '.');) {
        auto first = stmt.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        auto last = stmt.find_last_not_of(" \t\r\n");
        stmt = stmt.substr(first, last - first + 1);
        auto open = stmt.find('(');
        auto close = stmt.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw SyntaxError(1, 1, "name(value)", "'" + stmt + "'");
        std::string name = stmt.substr(0, open);
        std::string value = stmt.substr(open + 1, close - open - 1);
        if (name == "archetype") {
            auto a = archetype_from_string(value);
            if (!a) throw SyntaxError(1, 1, "an archetype name", "'" + value + "'");
            spec.archetype = *a;
        } else if (name == "governance") {
            auto g = governance_from_string(value);
            if (!g) throw SyntaxError(1, 1, "a governance mode", "'" + value + "'");
            spec.governance = *g;
        } else if (name == "org") {
            if (!is_valid_atom(value)) throw SyntaxError(1, 1, "an atom", "'" + value + "'");
            spec.orgs.push_back(value);
        } else {
            throw SyntaxError(1, 1, "archetype, governance or org", "'" + name + "'");
        }
    }
    return spec;
}

}  // namespace pbac::sim
