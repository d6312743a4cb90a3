#include "pbac/store.hpp"

#include <iostream>
#include <sstream>

#include "json.hpp"
#include "pbac/dsl.hpp"

namespace pbac {

using json = nlohmann::ordered_json;

namespace {

json provenance_to_json(const Provenance& p) {
    json j;
    j["by"] = p.asserted_by;
    j["cap"] = to_string(p.capability);
    j["at"] = p.asserted_at;
    if (p.expires_at) j["exp"] = *p.expires_at;
    if (p.signature) j["sig"] = *p.signature;
    return j;
}

Provenance provenance_from_json(const json& j) {
    Provenance p;
    p.asserted_by = j.at("by").get<std::string>();
    p.capability = capability_from_string(j.at("cap").get<std::string>())
                       .value_or(Capability::Qualify);
    p.asserted_at = j.at("at").get<std::int64_t>();
    if (j.contains("exp")) p.expires_at = j.at("exp").get<std::int64_t>();
    if (j.contains("sig")) p.signature = j.at("sig").get<std::string>();
    return p;
}

json mutation_to_json(const MutationEvent& ev) {
    json j;
    j["op"] = to_string(ev.kind);
    j["fact"] = ev.fact.to_string();
    j["provenance"] = provenance_to_json(ev.provenance);
    j["version"] = ev.version_after;
    j["at"] = ev.at;
    return j;
}

MutationEvent mutation_from_json(const json& j) {
    MutationEvent ev;
    std::string op = j.at("op").get<std::string>();
    ev.kind = op == "assert"  ? MutationEvent::Kind::Assert
              : op == "retract" ? MutationEvent::Kind::Retract
                                : MutationEvent::Kind::Expire;
    ev.fact = dsl::parse_fact(j.at("fact").get<std::string>());
    ev.provenance = provenance_from_json(j.at("provenance"));
    ev.version_after = j.at("version").get<std::uint64_t>();
    ev.at = j.at("at").get<std::int64_t>();
    return ev;
}

json tree_to_json(const DerivationTree& t) {
    json j;
    j["conclusion"] = t.conclusion;
    j["rule"] = to_string(t.rule);
    if (!t.children.empty()) {
        json kids = json::array();
        for (const auto& c : t.children) kids.push_back(tree_to_json(c));
        j["children"] = std::move(kids);
    }
    if (!t.forall_block.empty()) {
        json block = json::array();
        for (const auto& [subject, tree] : t.forall_block)
            block.push_back(json{{"subject", subject}, {"tree", tree_to_json(tree)}});
        j["forall"] = std::move(block);
    }
    return j;
}

DerivationTree tree_from_json(const json& j) {
    DerivationTree t;
    t.conclusion = j.at("conclusion").get<std::string>();
    t.rule = rule_from_string(j.at("rule").get<std::string>()).value_or(RuleId::Axiom);
    if (j.contains("children"))
        for (const auto& c : j.at("children")) t.children.push_back(tree_from_json(c));
    if (j.contains("forall"))
        for (const auto& e : j.at("forall"))
            t.forall_block.push_back(
                {e.at("subject").get<std::string>(), tree_from_json(e.at("tree"))});
    return t;
}

json premise_to_json(const PremiseStatus& p) {
    json j;
    j["premise"] = p.premise;
    j["satisfied"] = p.satisfied;
    if (!p.failing_subjects.empty()) j["failing_subjects"] = p.failing_subjects;
    return j;
}

PremiseStatus premise_from_json(const json& j) {
    PremiseStatus p;
    p.premise = j.at("premise").get<std::string>();
    p.satisfied = j.at("satisfied").get<bool>();
    if (j.contains("failing_subjects"))
        p.failing_subjects = j.at("failing_subjects").get<std::vector<Atom>>();
    return p;
}

json diagnosis_to_json(const Diagnosis& d) {
    json j;
    json req = json::array();
    for (const auto& p : d.request_premises) req.push_back(premise_to_json(p));
    j["request_premises"] = std::move(req);
    if (!d.note.empty()) j["note"] = d.note;
    json cands = json::array();
    for (const auto& c : d.candidates) {
        json jc;
        jc["rule"] = to_string(c.rule);
        jc["controller"] = c.controller;
        jc["anchor"] = c.anchor;
        jc["basis"] = to_string(c.basis);
        json prem = json::array();
        for (const auto& p : c.premises) prem.push_back(premise_to_json(p));
        jc["premises"] = std::move(prem);
        cands.push_back(std::move(jc));
    }
    j["candidates"] = std::move(cands);
    return j;
}

Diagnosis diagnosis_from_json(const json& j) {
    Diagnosis d;
    for (const auto& p : j.at("request_premises")) d.request_premises.push_back(premise_from_json(p));
    if (j.contains("note")) d.note = j.at("note").get<std::string>();
    for (const auto& jc : j.at("candidates")) {
        Diagnosis::Candidate c;
        c.rule = rule_from_string(jc.at("rule").get<std::string>()).value_or(RuleId::Specific);
        c.controller = jc.at("controller").get<std::string>();
        c.anchor = jc.at("anchor").get<std::string>();
        c.basis = legal_basis_from_string(jc.at("basis").get<std::string>())
                      .value_or(LegalBasis::Consent);
        for (const auto& p : jc.at("premises")) c.premises.push_back(premise_from_json(p));
        d.candidates.push_back(std::move(c));
    }
    return d;
}

json request_to_json(const Request& r) {
    json j;
    j["actor"] = r.actor;
    j["action"] = r.action;
    j["purpose"] = r.purpose;
    j["asset"] = r.asset;
    j["request_id"] = r.request_id;
    return j;
}

Request request_from_json(const json& j) {
    return {j.at("actor").get<std::string>(), j.at("action").get<std::string>(),
            j.at("purpose").get<std::string>(), j.at("asset").get<std::string>(),
            j.at("request_id").get<std::string>()};
}

json decision_to_json(const Decision& d) {
    json j;
    j["outcome"] = to_string(d.outcome);
    j["request"] = request_to_json(d.request);
    j["graph_version"] = d.graph_version;
    j["decided_at"] = d.decided_at;
    if (d.tree) j["tree"] = tree_to_json(*d.tree);
    if (d.diagnosis) j["diagnosis"] = diagnosis_to_json(*d.diagnosis);
    return j;
}

Decision decision_from_json(const json& j) {
    Decision d;
    d.outcome = j.at("outcome").get<std::string>() == "permit" ? Decision::Outcome::Permit
                                                               : Decision::Outcome::Deny;
    d.request = request_from_json(j.at("request"));
    d.graph_version = j.at("graph_version").get<std::uint64_t>();
    d.decided_at = j.at("decided_at").get<std::int64_t>();
    if (j.contains("tree")) d.tree = tree_from_json(j.at("tree"));
    if (j.contains("diagnosis")) d.diagnosis = diagnosis_from_json(j.at("diagnosis"));
    return d;
}

json record_to_json(const DecisionRecord& r) {
    json j;
    j["request"] = request_to_json(r.request);
    j["decision"] = decision_to_json(r.decision);
    j["graph_version"] = r.graph_version;
    if (r.processed_at) j["processed_at"] = *r.processed_at;
    j["rule_set_version"] = r.rule_set_version;
    if (r.ternary) j["ternary"] = true;
    if (r.pip_veto) j["pip_veto"] = *r.pip_veto;
    return j;
}

DecisionRecord record_from_json(const json& j) {
    DecisionRecord r;
    r.request = request_from_json(j.at("request"));
    r.decision = decision_from_json(j.at("decision"));
    r.graph_version = j.at("graph_version").get<std::uint64_t>();
    if (j.contains("processed_at")) r.processed_at = j.at("processed_at").get<std::int64_t>();
    r.rule_set_version = j.at("rule_set_version").get<std::string>();
    if (j.contains("ternary")) r.ternary = j.at("ternary").get<bool>();
    if (j.contains("pip_veto")) r.pip_veto = j.at("pip_veto").get<std::string>();
    return r;
}

}  // namespace

Decision apply_pip_veto(Decision d, const std::string& reason) {
    d.outcome = Decision::Outcome::Deny;
    d.tree.reset();
    Diagnosis diag;
    diag.note = "permit vetoed by policy information point";
    diag.request_premises.push_back({"pip: " + reason, false, {}});
    d.diagnosis = std::move(diag);
    return d;
}

std::string serialize_decision(const Decision& d) { return decision_to_json(d).dump(); }
std::string serialize_decision_record(const DecisionRecord& r) { return record_to_json(r).dump(); }
std::string serialize_tree(const DerivationTree& t) { return tree_to_json(t).dump(); }
std::string serialize_diagnosis(const Diagnosis& d) { return diagnosis_to_json(d).dump(); }

std::string serialize_audit_report(const AuditReport& r) {
    json j;
    j["rule_set_version"] = r.rule_set_version;
    json muts = json::array();
    for (const auto& m : r.mutations) muts.push_back(mutation_to_json(m));
    j["mutations"] = std::move(muts);
    json decs = json::array();
    for (const auto& d : r.decisions) decs.push_back(record_to_json(d));
    j["decisions"] = std::move(decs);
    return j.dump(2);
}

AuditReport parse_audit_report(const std::string& text) {
    json j = json::parse(text);
    AuditReport r;
    r.rule_set_version = j.at("rule_set_version").get<std::string>();
    for (const auto& m : j.at("mutations")) r.mutations.push_back(mutation_from_json(m));
    for (const auto& d : j.at("decisions")) r.decisions.push_back(record_from_json(d));
    return r;
}

std::string serialize_subject_report(const SubjectReport& r) {
    json j;
    j["subject"] = r.subject;
    json entries = json::array();
    for (const auto& e : r.entries) {
        json je;
        je["asset"] = e.asset;
        je["action"] = e.action;
        je["purpose"] = e.purpose;
        je["basis"] = to_string(e.basis);
        je["controller"] = e.controller;
        je["decided_at"] = e.decided_at;
        je["processed"] = e.processed;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    return j.dump(2);
}

DecisionLog::DecisionLog(const std::filesystem::path& log_path) {
    if (log_path.empty()) return;
    if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
    if (std::filesystem::exists(log_path)) {
        DecisionLog previous = load(log_path);
        mutations_ = std::move(previous.mutations_);
        decisions_ = std::move(previous.decisions_);
        by_request_id_ = std::move(previous.by_request_id_);
    }
    file_.open(log_path, std::ios::app);
    if (!file_) throw StoreUnavailable("cannot open log file '" + log_path.string() + "'");
}

void DecisionLog::write_line(const std::string& line) {
    if (!file_.is_open()) return;
    file_ << line << '\n';
    file_.flush();
    if (!file_) throw StoreUnavailable("write to decision log failed");
}

void DecisionLog::append_mutation(const MutationEvent& ev) {
    std::lock_guard lk(mu_);
    mutations_.push_back(ev);
    json j;
    j["type"] = "mutation";
    j["event"] = mutation_to_json(ev);
    write_line(j.dump());
}

void DecisionLog::append_decision(const DecisionRecord& rec) {
    std::lock_guard lk(mu_);
    by_request_id_[rec.request.request_id] = decisions_.size();
    decisions_.push_back(rec);
    json j;
    j["type"] = "decision";
    j["record"] = json::parse(serialize_decision_record(rec));
    write_line(j.dump());
}

std::int64_t DecisionLog::mark_processed(const std::string& request_id, std::int64_t at) {
    std::lock_guard lk(mu_);
    auto it = by_request_id_.find(request_id);
    if (it == by_request_id_.end())
        throw UnknownRequest("no decision recorded for request '" + request_id + "'");
    DecisionRecord& rec = decisions_[it->second];
    if (!rec.decision.permitted()) {
        // A PEP reporting processing after a Deny is a protocol breach worth alerting.
        std::cerr << "ALERT: processed notification for denied request '" << request_id << "'\n";
        throw NotPermitted("request '" + request_id + "' was denied");
    }
    if (rec.processed_at) throw AlreadyProcessed("request '" + request_id + "' already processed");
    rec.processed_at = at;
    json j;
    j["type"] = "processed";
    j["request_id"] = request_id;
    j["at"] = at;
    write_line(j.dump());
    return at;
}

const DecisionRecord* DecisionLog::find(const std::string& request_id) const {
    std::lock_guard lk(mu_);
    auto it = by_request_id_.find(request_id);
    return it == by_request_id_.end() ? nullptr : &decisions_[it->second];
}

DecisionLog DecisionLog::load(const std::filesystem::path& log_path) {
    std::ifstream in(log_path);
    if (!in) throw StoreUnavailable("cannot open log file '" + log_path.string() + "'");
    DecisionLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        std::string type = j.at("type").get<std::string>();
        if (type == "mutation") {
            log.mutations_.push_back(mutation_from_json(j.at("event")));
        } else if (type == "decision") {
            DecisionRecord rec = record_from_json(j.at("record"));
            log.by_request_id_[rec.request.request_id] = log.decisions_.size();
            log.decisions_.push_back(std::move(rec));
        } else if (type == "processed") {
            auto it = log.by_request_id_.find(j.at("request_id").get<std::string>());
            if (it != log.by_request_id_.end())
                log.decisions_[it->second].processed_at = j.at("at").get<std::int64_t>();
        }
    }
    return log;
}

AuditReport generate_audit_report(const DecisionLog& log, const std::string& rule_set_version) {
    return {rule_set_version, log.mutations(), log.decisions()};
}

PurposeGraph graph_at_version(const std::vector<MutationEvent>& mutations, std::uint64_t version) {
    std::map<Fact, Provenance> facts;
    std::uint64_t reached = 0;
    for (const auto& ev : mutations) {
        if (ev.version_after > version) break;
        if (ev.kind == MutationEvent::Kind::Assert)
            facts.insert_or_assign(ev.fact, ev.provenance);
        else
            facts.erase(ev.fact);
        reached = ev.version_after;
    }
    return PurposeGraph::from_parts(std::move(facts), reached);
}

namespace {

// The legal-basis node of a permit proof carries the basis rule and names the
// controller in its conclusion "legal-basis(C,P,D)".
const DerivationTree* find_legal_basis_node(const DerivationTree& t) {
    if (t.conclusion.rfind("legal-basis(", 0) == 0) return &t;
    for (const auto& c : t.children)
        if (const auto* hit = find_legal_basis_node(c)) return hit;
    return nullptr;
}

}  // namespace

SubjectReport generate_subject_report(const AuditReport& report, const Atom& subject) {
    SubjectReport out;
    out.subject = subject;
    for (const DecisionRecord& rec : report.decisions) {
        if (!rec.decision.permitted() || !rec.decision.tree) continue;
        PurposeGraph g = graph_at_version(report.mutations, rec.graph_version);
        if (!g.contains(Fact::subject_of(subject, rec.request.asset))) continue;
        SubjectReport::Entry e;
        e.asset = rec.request.asset;
        e.action = rec.request.action;
        e.purpose = rec.request.purpose;
        if (const auto* lb = find_legal_basis_node(*rec.decision.tree)) {
            e.basis = basis_for_rule(lb->rule).value_or(LegalBasis::Consent);
            std::string inner = lb->conclusion.substr(12);  // after "legal-basis("
            e.controller = inner.substr(0, inner.find(','));
        }
        e.decided_at = rec.decision.decided_at;
        e.processed = rec.processed_at.has_value();
        out.entries.push_back(std::move(e));
    }
    return out;
}

ReplayResult replay_audit_report(const AuditReport& report) {
    ReplayResult result;
    for (const DecisionRecord& rec : report.decisions) {
        PurposeGraph g = graph_at_version(report.mutations, rec.graph_version);
        Decision redecided;
        if (rec.ternary) {
            redecided = decide_ternary(g, rec.request.actor, rec.request.action,
                                       rec.request.asset, true, rec.request.request_id);
        } else {
            redecided = decide_request(g, rec.request);
        }
        if (rec.pip_veto) redecided = apply_pip_veto(std::move(redecided), *rec.pip_veto);
        redecided.decided_at = rec.decision.decided_at;  // timestamps are data, not derivation
        std::string expect = serialize_decision(rec.decision);
        std::string got = serialize_decision(redecided);
        ++result.decisions_checked;
        if (expect != got) {
            result.ok = false;
            result.detail = "request '" + rec.request.request_id + "' replays differently";
            return result;
        }
    }
    return result;
}

}  // namespace pbac
