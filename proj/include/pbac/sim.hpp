#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pbac/dsl.hpp"
#include "pbac/engine.hpp"

namespace pbac::sim {

enum class Archetype {
    NoDelegation,
    DelegatedAction,
    DelegatedProcessing,
    DelegatedCollection,
    Distributed,
    IndependentControllers,
};

enum class AdminRole { Controller, Collector, Performer };
enum class EnforcementRole { PEP, PDP, PAP };
enum class Governance { SelfGoverned, IntermediaryGoverned };

const char* to_string(Archetype a);
const char* to_string(AdminRole r);
const char* to_string(EnforcementRole r);
const char* to_string(Governance g);
std::optional<Archetype> archetype_from_string(const std::string& s);
std::optional<Governance> governance_from_string(const std::string& s);

int archetype_org_count(Archetype a);
// Admin-role sets per organisation, in the archetype's organisation order.
std::vector<std::set<AdminRole>> archetype_roles(Archetype a);

// Capabilities an organisation may exercise. Controllers also facilitate
// Consent (they collect it from subjects and relay it).
std::set<Capability> capabilities_for(const std::set<AdminRole>& roles);

struct TopologyNode {
    Atom org;
    std::set<AdminRole> admin_roles;
    std::set<EnforcementRole> enforcement_roles;
};

// Which PDP/PAP a node's PEP and administration talk to.
struct Wiring {
    Atom org;
    Atom pdp_org;
    Atom pap_org;
};

struct Topology {
    Archetype archetype = Archetype::NoDelegation;
    Governance governance = Governance::SelfGoverned;
    std::vector<TopologyNode> nodes;
    std::vector<Wiring> wiring;

    const TopologyNode* find(const Atom& org) const;
    const Wiring* wiring_for(const Atom& org) const;
};

// Intermediary-governed topologies get an extra node named "Intermediary"
// hosting PDP+PAP; `orgs` still lists only the archetype's organisations.
Topology build_topology(Archetype a, Governance g, const std::vector<Atom>& orgs);

// Table-1 / Table-2 / architecture constraints; empty for built topologies.
std::vector<std::string> verify_capability_assignment(const Topology& t);

// Fig-7 message edges, in protocol order.
enum class MsgEdge { A, B, C, D, E };
const char* to_string(MsgEdge e);

struct SimMessage {
    int seq = 0;
    Atom from_org;
    Atom to_org;
    MsgEdge edge = MsgEdge::A;
    std::string payload;
};

struct SimTrace {
    std::map<Atom, dsl::Trace> org_traces;
    std::vector<SimMessage> messages;
    // Outcome per decided request, in decision order: "permit"/"deny" plus the tuple.
    std::vector<std::string> decision_sequence;

    // Line-delimited export.
    std::string to_records() const;
    bool has_cross_traffic(const Atom& org_a, const Atom& org_b) const;
};

struct SimOptions {
    bool loopback = false;  // run PDP/PAP nodes as real services over 127.0.0.1
    bool enforce_capabilities = true;
    std::string rule_set_version = "sim";
    std::function<std::int64_t()> clock = [] { return std::int64_t{0}; };
};

// Runs each organisation's script in node order: administration routes to the
// wired PAP (capability-checked against the org's roles), triggers go through
// the local PEP to the wired PDP. Throws WiringError if a trigger has no PEP
// to go through; capability violations become Violation trace entries
// attributed to the issuing org.
SimTrace run_scenario(const Topology& t, const std::map<Atom, dsl::Program>& scripts,
                      const SimOptions& opts = {});

// Topology config file: statements in the graph-file syntax family, e.g.
//   archetype(Distributed). governance(SelfGoverned). org(Ctrl). org(Col). org(Perf).
struct TopologySpec {
    Archetype archetype = Archetype::NoDelegation;
    Governance governance = Governance::SelfGoverned;
    std::vector<Atom> orgs;
};

TopologySpec parse_topology_config(const std::string& text);

}  // namespace pbac::sim
