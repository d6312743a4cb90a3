#pragma once

#include <functional>
#include <memory>
#include <string>

#include "pbac/store.hpp"

namespace pbac {

struct EngineOptions {
    std::string rule_set_version;
    bool enforce_capabilities = true;
    bool ternary_enabled = false;
    std::function<std::int64_t()> clock;  // defaults to wall clock (UTC seconds)
    std::filesystem::path log_path;       // empty: memory-only
    // PIP extension point, disabled by default: may veto a Permit based on
    // externally supplied attributes. Returns a veto reason, or nullopt to
    // let the decision stand. Vetoes are recorded so replay stays exact.
    std::function<std::optional<std::string>(const Request&)> pip_veto;
};

// PAP + PDP behind one administration/decision surface. Decisions run an
// expiry sweep first, evaluate one immutable snapshot, and persist their
// record before returning.
class PdpEngine {
public:
    explicit PdpEngine(EngineOptions opts, PurposeGraph initial = {});

    MutationEvent admin_assert(const Fact& f, const Provenance& prov);
    std::optional<MutationEvent> admin_retract(const Fact& f, const Provenance& prov);
    std::vector<MutationEvent> sweep_now();

    DecisionRecord handle_decision(const Request& r);
    // Ternary variant; requires the feature flag.
    DecisionRecord handle_decision_ternary(const Atom& actor, const Atom& action,
                                           const Atom& asset, const std::string& request_id);
    std::int64_t handle_processed(const std::string& request_id);

    AuditReport audit_report() const;
    SubjectReport subject_report(const Atom& subject) const;

    std::shared_ptr<const PurposeGraph> snapshot() const { return store_.snapshot(); }
    std::uint64_t graph_version() const { return store_.version(); }
    const EngineOptions& options() const { return opts_; }
    const DecisionLog& log() const { return log_; }

    std::string next_request_id();

private:
    DecisionRecord record_and_respond(Decision d, bool ternary);

    EngineOptions opts_;
    GraphStore store_;
    DecisionLog log_;
    std::mutex id_mu_;
    std::uint64_t id_counter_ = 0;
};

}  // namespace pbac
