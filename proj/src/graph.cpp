#include "pbac/graph.hpp"

#include <algorithm>

namespace pbac {

PurposeGraph PurposeGraph::from_parts(std::map<Fact, Provenance> facts, std::uint64_t version) {
    PurposeGraph g;
    g.facts_ = std::move(facts);
    g.version_ = version;
    return g;
}

const Provenance* PurposeGraph::provenance_of(const Fact& f) const {
    auto it = facts_.find(f);
    return it == facts_.end() ? nullptr : &it->second;
}

namespace {

void check_capability(const Fact& f, const Provenance& prov, bool enforce) {
    if (enforce && !capability_licenses(prov.capability, f.kind))
        throw CapabilityViolation("capability " + std::string(to_string(prov.capability)) +
                                  " does not license " + f.predicate_name());
}

}  // namespace

PurposeGraph assert_fact(const PurposeGraph& g, const Fact& f, const Provenance& prov,
                         bool enforce_capabilities) {
    validate_provenance(prov);
    check_capability(f, prov, enforce_capabilities);
    PurposeGraph out = g;
    out.facts_.insert_or_assign(f, prov);
    out.version_ = g.version_ + 1;
    return out;
}

PurposeGraph retract_fact(const PurposeGraph& g, const Fact& f, const Provenance& prov,
                          bool enforce_capabilities) {
    check_capability(f, prov, enforce_capabilities);
    if (!g.contains(f)) return g;
    PurposeGraph out = g;
    out.facts_.erase(f);
    out.version_ = g.version_ + 1;
    return out;
}

std::pair<PurposeGraph, std::vector<Fact>> expire_facts(const PurposeGraph& g, std::int64_t now) {
    std::vector<Fact> expired;
    for (const auto& [fact, prov] : g.facts())
        if (prov.expires_at && *prov.expires_at <= now) expired.push_back(fact);
    if (expired.empty()) return {g, {}};
    PurposeGraph out = g;
    for (const Fact& f : expired) out.facts_.erase(f);
    out.version_ = g.version_ + 1;
    return {std::move(out), std::move(expired)};
}

std::set<Atom> Sorts::actors() const {
    std::set<Atom> out = controllers;
    out.insert(processors.begin(), processors.end());
    return out;
}

Sorts derive_sorts(const PurposeGraph& g) {
    Sorts s;
    for (const auto& [f, prov] : g.facts()) {
        const auto& a = f.args;
        switch (f.kind) {
            case FactKind::SubjectOf:
                s.subjects.insert(a[0]);
                s.assets.insert(a[1]);
                break;
            case FactKind::PrerequisiteOf:
                s.actions.insert(a[0]);
                s.purposes.insert(a[1]);
                break;
            case FactKind::SpecificOf:
            case FactKind::CompatibleWith:
                s.purposes.insert(a[0]);
                s.purposes.insert(a[1]);
                break;
            case FactKind::SufficientlySpecific:
                s.purposes.insert(a[0]);
                break;
            case FactKind::LegalBasisClaim:
                s.controllers.insert(a[0]);
                s.purposes.insert(a[1]);
                break;
            case FactKind::ConsentGiven:
            case FactKind::Contract:
            case FactKind::HasBeenInformed:
                s.subjects.insert(a[0]);
                s.controllers.insert(a[1]);
                s.purposes.insert(a[2]);
                break;
            case FactKind::Dpa:
                s.controllers.insert(a[0]);
                s.processors.insert(a[1]);
                s.purposes.insert(a[2]);
                break;
            case FactKind::Asset:
                s.assets.insert(a[0]);
                break;
            case FactKind::ActorDecl:
                switch (*f.actor_kind) {
                    case ActorKind::Controller: s.controllers.insert(a[0]); break;
                    case ActorKind::Processor: s.processors.insert(a[0]); break;
                    case ActorKind::Subject: s.subjects.insert(a[0]); break;
                    case ActorKind::Authority: s.authorities.insert(a[0]); break;
                }
                break;
            case FactKind::PurposeDecl:
                s.purposes.insert(a[0]);
                break;
            case FactKind::ActionDecl:
                s.actions.insert(a[0]);
                break;
            case FactKind::ProcessingPurposeFor:
                s.actions.insert(a[0]);
                s.purposes.insert(a[1]);
                break;
        }
    }
    return s;
}

std::vector<Atom> subjects_of_asset(const PurposeGraph& g, const Atom& d) {
    std::vector<Atom> out;
    for (const auto& [f, prov] : g.facts())
        if (f.kind == FactKind::SubjectOf && f.args[1] == d) out.push_back(f.args[0]);
    return out;  // map order is already atom order
}

const char* to_string(MutationEvent::Kind k) {
    switch (k) {
        case MutationEvent::Kind::Assert: return "assert";
        case MutationEvent::Kind::Retract: return "retract";
        case MutationEvent::Kind::Expire: return "expire";
    }
    return "?";
}

GraphStore::GraphStore(PurposeGraph initial)
    : latest_(std::make_shared<const PurposeGraph>(std::move(initial))) {}

std::shared_ptr<const PurposeGraph> GraphStore::snapshot() const {
    std::lock_guard lk(mu_);
    return latest_;
}

std::uint64_t GraphStore::version() const {
    std::lock_guard lk(mu_);
    return latest_->version();
}

MutationEvent GraphStore::apply_assert(const Fact& f, const Provenance& prov, bool enforce,
                                       std::int64_t at) {
    std::lock_guard lk(mu_);
    auto next = std::make_shared<const PurposeGraph>(assert_fact(*latest_, f, prov, enforce));
    latest_ = next;
    MutationEvent ev{MutationEvent::Kind::Assert, f, prov, next->version(), at};
    history_.push_back(ev);
    return ev;
}

std::optional<MutationEvent> GraphStore::apply_retract(const Fact& f, const Provenance& prov,
                                                       bool enforce, std::int64_t at) {
    std::lock_guard lk(mu_);
    PurposeGraph next = retract_fact(*latest_, f, prov, enforce);
    if (next.version() == latest_->version()) return std::nullopt;  // was absent
    latest_ = std::make_shared<const PurposeGraph>(std::move(next));
    MutationEvent ev{MutationEvent::Kind::Retract, f, prov, latest_->version(), at};
    history_.push_back(ev);
    return ev;
}

std::vector<MutationEvent> GraphStore::sweep_expired(std::int64_t now) {
    std::lock_guard lk(mu_);
    auto [next, expired] = expire_facts(*latest_, now);
    if (expired.empty()) return {};
    std::vector<MutationEvent> events;
    events.reserve(expired.size());
    for (const Fact& f : expired) {
        const Provenance* p = latest_->provenance_of(f);
        events.push_back({MutationEvent::Kind::Expire, f, p ? *p : Provenance{"system"},
                          next.version(), now});
    }
    latest_ = std::make_shared<const PurposeGraph>(std::move(next));
    history_.insert(history_.end(), events.begin(), events.end());
    return events;
}

std::vector<MutationEvent> GraphStore::history() const {
    std::lock_guard lk(mu_);
    return history_;
}

}  // namespace pbac
