#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbac/dsl.hpp"
#include "pbac/graph_io.hpp"
#include "pbac/service.hpp"
#include "pbac/sim.hpp"
#include "pbac/store.hpp"
#include "pbac/validate.hpp"
#include "pbac/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDenied = 1;
constexpr int kExitUsage = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pbac::Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_check(const std::string& file, const std::string& graph_path, bool enforce,
              bool structured) {
    pbac::PurposeGraph graph;
    if (!graph_path.empty()) graph = pbac::load_graph_file(graph_path);
    pbac::dsl::Program program = pbac::dsl::parse_program(slurp(file));
    pbac::dsl::ExecOptions opts;
    opts.enforce_capabilities = enforce;
    auto [trace, final_graph] = pbac::dsl::execute_program(program, std::move(graph), opts);

    for (const auto& e : trace.entries) {
        if (structured) {
            json j{{"statement", e.statement}, {"outcome", pbac::dsl::to_string(e.outcome)}};
            if (!e.detail.empty()) j["detail"] = e.detail;
            std::cout << j.dump() << "\n";
        } else {
            std::cout << e.statement << "  // " << pbac::dsl::to_string(e.outcome);
            if (!e.detail.empty()) std::cout << " (" << e.detail << ")";
            std::cout << "\n";
        }
    }
    return trace.clean() ? kExitOk : kExitDenied;
}

int run_graph(const std::string& mode, const std::string& file, bool structured) {
    pbac::PurposeGraph g = pbac::load_graph_file(file);
    if (mode == "dot") {
        std::cout << pbac::to_dot(g);
        return kExitOk;
    }
    pbac::ValidationReport report = pbac::validate_graph(g);
    if (structured) {
        json warnings = json::array();
        for (const auto& w : report.warnings)
            warnings.push_back(json{{"code", pbac::to_string(w.code)}, {"message", w.message}});
        std::cout << json{{"warnings", warnings}}.dump(2) << "\n";
    } else if (report.empty()) {
        std::cout << "no warnings\n";
    } else {
        for (const auto& w : report.warnings)
            std::cout << pbac::to_string(w.code) << ": " << w.message << "\n";
    }
    return kExitOk;
}

fs::path resolve_store(const std::string& store) {
    fs::path p(store);
    if (fs::is_directory(p)) return p / "log.jsonl";
    return p;
}

pbac::AuditReport load_report(const std::string& store) {
    pbac::DecisionLog log = pbac::DecisionLog::load(resolve_store(store));
    std::string rules = pbac::kRuleSetVersion;
    if (!log.decisions().empty()) rules = log.decisions().front().rule_set_version;
    return pbac::generate_audit_report(log, rules);
}

int run_audit_report(const std::string& store, bool verify) {
    pbac::AuditReport report = load_report(store);
    std::cout << pbac::serialize_audit_report(report) << "\n";
    if (verify) {
        pbac::ReplayResult result = pbac::replay_audit_report(report);
        std::cerr << (result.ok ? "replay ok (" : "replay FAILED (")
                  << result.decisions_checked << " decisions)";
        if (!result.ok) std::cerr << ": " << result.detail;
        std::cerr << "\n";
        return result.ok ? kExitOk : kExitDenied;
    }
    return kExitOk;
}

int run_audit_subject(const std::string& store, const std::string& subject) {
    std::cout << pbac::serialize_subject_report(
                     pbac::generate_subject_report(load_report(store), subject))
              << "\n";
    return kExitOk;
}

int run_simulate(pbac::sim::TopologySpec spec, const std::string& scripts_dir, bool loopback,
                 bool enforce, bool structured) {
    pbac::sim::Topology topo =
        pbac::sim::build_topology(spec.archetype, spec.governance, spec.orgs);
    std::map<pbac::Atom, pbac::dsl::Program> scripts;
    for (const auto& node : topo.nodes) {
        fs::path p = fs::path(scripts_dir) / (node.org + ".plg");
        if (fs::exists(p)) scripts[node.org] = pbac::dsl::parse_program(slurp(p.string()));
    }
    pbac::sim::SimOptions opts;
    opts.loopback = loopback;
    opts.enforce_capabilities = enforce;
    pbac::sim::SimTrace trace = pbac::sim::run_scenario(topo, scripts, opts);

    if (structured) {
        std::cout << trace.to_records();
    } else {
        for (const auto& [org, t] : trace.org_traces)
            for (const auto& e : t.entries)
                std::cout << org << ": " << e.statement << "  // "
                          << pbac::dsl::to_string(e.outcome) << "\n";
        for (const auto& m : trace.messages)
            std::cout << "msg " << m.seq << " [" << pbac::sim::to_string(m.edge) << "] "
                      << m.from_org << " -> " << m.to_org << ": " << m.payload << "\n";
        for (const auto& d : trace.decision_sequence) std::cout << d << "\n";
    }
    for (const auto& [org, t] : trace.org_traces)
        if (!t.clean()) return kExitDenied;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"purpose-based access control engine"};
    app.set_version_flag("--version", pbac::kProjectVersion);
    app.require_subcommand(1);

    std::string format = "text";
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));

    auto* check = app.add_subcommand("check", "run a scenario script");
    std::string check_file, check_graph;
    bool check_enforce = false;
    check->add_option("file", check_file, "scenario script (.plg)")->required();
    check->add_option("--graph", check_graph, "initial purpose-graph file");
    check->add_flag("--enforce-capabilities", check_enforce,
                    "enforce Table-1 capabilities on asserts");

    auto* serve = app.add_subcommand("serve", "run the PDP/PAP decision service");
    std::string serve_config;
    pbac::ServiceConfig cfg;
    serve->add_option("--config", serve_config, "JSON config file");
    serve->add_option("--listen", cfg.listen_address, "listen address");
    serve->add_option("--port", cfg.port, "listen port");
    serve->add_option("--graph", cfg.initial_graph, "initial purpose-graph file");
    serve->add_option("--log", cfg.log_path, "append-only log path");
    serve->add_option("--ttl-sweep-interval", cfg.ttl_sweep_interval_s,
                      "expiry sweep interval, seconds (0: lazy only)");
    serve->add_flag("--ternary", cfg.ternary_enabled, "enable the ternary request variant");

    auto* graph_cmd = app.add_subcommand("graph", "validate or export a purpose graph");
    std::string graph_mode, graph_file;
    graph_cmd->add_option("mode", graph_mode, "validate | dot")
        ->required()
        ->check(CLI::IsMember({"validate", "dot"}));
    graph_cmd->add_option("file", graph_file, "graph file")->required();

    auto* audit = app.add_subcommand("audit", "audit-report and subject-report export");
    std::string audit_mode, audit_store, audit_subject;
    bool audit_verify = false;
    audit->add_option("mode", audit_mode, "report | subject")
        ->required()
        ->check(CLI::IsMember({"report", "subject"}));
    audit->add_option("subject", audit_subject, "subject atom (subject mode)");
    audit->add_option("--store", audit_store, "store directory or log file")->required();
    audit->add_flag("--verify-replay", audit_verify, "re-derive decisions and compare");

    auto* simulate = app.add_subcommand("simulate", "run scripts on a delegation archetype");
    std::string sim_archetype, sim_governance = "SelfGoverned", sim_orgs, sim_scripts,
                sim_config;
    bool sim_loopback = false, sim_no_enforce = false;
    simulate->add_option("--archetype", sim_archetype, "delegation archetype");
    simulate->add_option("--governance", sim_governance, "SelfGoverned | IntermediaryGoverned");
    simulate->add_option("--orgs", sim_orgs, "comma-separated organisation atoms");
    simulate->add_option("--config", sim_config, "topology config file");
    simulate->add_option("--scripts", sim_scripts, "directory with <org>.plg scripts")
        ->required();
    simulate->add_flag("--loopback", sim_loopback, "run nodes as real services over loopback");
    simulate->add_flag("--no-enforce", sim_no_enforce, "disable capability enforcement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help or the error
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    bool structured = format == "structured";
    try {
        if (check->parsed()) return run_check(check_file, check_graph, check_enforce, structured);
        if (serve->parsed()) {
            pbac::ServiceConfig effective = cfg;
            if (!serve_config.empty()) {
                effective = pbac::ServiceConfig::from_file(serve_config);
            } else {
                effective.apply_env_overrides();
            }
            pbac::PdpService service(effective);
            return service.run_blocking();
        }
        if (graph_cmd->parsed()) return run_graph(graph_mode, graph_file, structured);
        if (audit->parsed()) {
            if (audit_mode == "report") return run_audit_report(audit_store, audit_verify);
            if (audit_subject.empty()) {
                std::cerr << "audit subject needs a subject atom\n";
                return kExitUsage;
            }
            return run_audit_subject(audit_store, audit_subject);
        }
        if (simulate->parsed()) {
            pbac::sim::TopologySpec spec;
            if (!sim_config.empty()) {
                spec = pbac::sim::parse_topology_config(slurp(sim_config));
            } else {
                auto a = pbac::sim::archetype_from_string(sim_archetype);
                auto g = pbac::sim::governance_from_string(sim_governance);
                if (!a || !g) {
                    std::cerr << "unknown archetype or governance mode\n";
                    return kExitUsage;
                }
                spec.archetype = *a;
                spec.governance = *g;
                std::stringstream ss(sim_orgs);
                for (std::string org; std::getline(ss, org, ',');)
                    if (!org.empty()) spec.orgs.push_back(org);
            }
            return run_simulate(spec, sim_scripts, sim_loopback, !sim_no_enforce, structured);
        }
    } catch (const pbac::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
