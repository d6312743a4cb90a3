#include "pbac/engine.hpp"

#include <chrono>
#include <limits>

#include "pbac/version.hpp"

namespace pbac {

namespace {

std::int64_t wall_clock() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// A restarted engine resumes the graph its log last described.
PurposeGraph resume_graph(const std::filesystem::path& log_path) {
    if (log_path.empty() || !std::filesystem::exists(log_path)) return {};
    return graph_at_version(DecisionLog::load(log_path).mutations(),
                            std::numeric_limits<std::uint64_t>::max());
}

}  // namespace

PdpEngine::PdpEngine(EngineOptions opts, PurposeGraph initial)
    : opts_(std::move(opts)), store_(resume_graph(opts_.log_path)), log_(opts_.log_path) {
    if (!opts_.clock) opts_.clock = wall_clock;
    if (opts_.rule_set_version.empty()) opts_.rule_set_version = kRuleSetVersion;
    id_counter_ = log_.decisions().size();
    if (store_.version() > 0) return;  // resumed from an existing log
    // Boot facts go through the store so the mutation history is complete and
    // every later decision can be replayed from it.
    std::int64_t now = opts_.clock();
    for (const auto& [fact, prov] : initial.facts())
        log_.append_mutation(store_.apply_assert(fact, prov, false, now));
}

MutationEvent PdpEngine::admin_assert(const Fact& f, const Provenance& prov) {
    MutationEvent ev = store_.apply_assert(f, prov, opts_.enforce_capabilities, opts_.clock());
    log_.append_mutation(ev);
    return ev;
}

std::optional<MutationEvent> PdpEngine::admin_retract(const Fact& f, const Provenance& prov) {
    auto ev = store_.apply_retract(f, prov, opts_.enforce_capabilities, opts_.clock());
    if (ev) log_.append_mutation(*ev);
    return ev;
}

std::vector<MutationEvent> PdpEngine::sweep_now() {
    std::vector<MutationEvent> evs = store_.sweep_expired(opts_.clock());
    for (const auto& ev : evs) log_.append_mutation(ev);
    return evs;
}

std::string PdpEngine::next_request_id() {
    std::lock_guard lk(id_mu_);
    std::string id = "req-" + std::to_string(++id_counter_);
    while (log_.find(id)) id = "req-" + std::to_string(++id_counter_);
    return id;
}

DecisionRecord PdpEngine::record_and_respond(Decision d, bool ternary) {
    DecisionRecord rec;
    if (d.permitted() && opts_.pip_veto) {
        if (auto reason = opts_.pip_veto(d.request)) {
            d = apply_pip_veto(std::move(d), *reason);
            rec.pip_veto = reason;
        }
    }
    rec.request = d.request;
    rec.graph_version = d.graph_version;
    rec.rule_set_version = opts_.rule_set_version;
    rec.ternary = ternary;
    rec.decision = std::move(d);
    log_.append_decision(rec);  // persisted before the caller sees the decision
    return rec;
}

DecisionRecord PdpEngine::handle_decision(const Request& r) {
    validate_request(r);
    if (log_.find(r.request_id))
        throw MalformedRequest("request_id '" + r.request_id + "' was already decided");
    sweep_now();
    auto snap = store_.snapshot();
    Decision d = decide_request(*snap, r);
    d.decided_at = opts_.clock();
    return record_and_respond(std::move(d), false);
}

DecisionRecord PdpEngine::handle_decision_ternary(const Atom& actor, const Atom& action,
                                                  const Atom& asset,
                                                  const std::string& request_id) {
    if (log_.find(request_id))
        throw MalformedRequest("request_id '" + request_id + "' was already decided");
    sweep_now();
    auto snap = store_.snapshot();
    Decision d = decide_ternary(*snap, actor, action, asset, opts_.ternary_enabled, request_id);
    d.decided_at = opts_.clock();
    return record_and_respond(std::move(d), true);
}

std::int64_t PdpEngine::handle_processed(const std::string& request_id) {
    return log_.mark_processed(request_id, opts_.clock());
}

AuditReport PdpEngine::audit_report() const {
    return generate_audit_report(log_, opts_.rule_set_version);
}

SubjectReport PdpEngine::subject_report(const Atom& subject) const {
    return generate_subject_report(audit_report(), subject);
}

}  // namespace pbac
