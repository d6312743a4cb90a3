#include "pbac/fact.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace pbac {

bool is_valid_atom(const Atom& a) {
    if (a.empty() || !std::isalpha(static_cast<unsigned char>(a.front()))) return false;
    return std::all_of(a.begin(), a.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_';
    });
}

const char* to_string(ActorKind k) {
    switch (k) {
        case ActorKind::Controller: return "controller";
        case ActorKind::Processor: return "processor";
        case ActorKind::Subject: return "subject";
        case ActorKind::Authority: return "authority";
    }
    return "?";
}

const char* to_string(LegalBasis b) {
    switch (b) {
        case LegalBasis::Consent: return "consent";
        case LegalBasis::Contract: return "contract";
        case LegalBasis::LegalObligation: return "legal-obligation";
        case LegalBasis::VitalInterest: return "vital-interest";
        case LegalBasis::PublicInterest: return "public-interest";
        case LegalBasis::LegitimateInterest: return "legitimate-interest";
    }
    return "?";
}

const char* to_string(Capability c) {
    switch (c) {
        case Capability::Control: return "Control";
        case Capability::Qualify: return "Qualify";
        case Capability::Collect: return "Collect";
        case Capability::Perform: return "Perform";
        case Capability::Consent: return "Consent";
    }
    return "?";
}

std::optional<Capability> capability_from_string(const std::string& s) {
    if (s == "Control") return Capability::Control;
    if (s == "Qualify") return Capability::Qualify;
    if (s == "Collect") return Capability::Collect;
    if (s == "Perform") return Capability::Perform;
    if (s == "Consent") return Capability::Consent;
    return std::nullopt;
}

std::optional<LegalBasis> legal_basis_from_string(const std::string& s) {
    for (LegalBasis b : {LegalBasis::Consent, LegalBasis::Contract, LegalBasis::LegalObligation,
                         LegalBasis::VitalInterest, LegalBasis::PublicInterest,
                         LegalBasis::LegitimateInterest}) {
        if (s == to_string(b)) return b;
    }
    return std::nullopt;
}

int fact_arity(FactKind k) {
    switch (k) {
        case FactKind::Asset:
        case FactKind::SufficientlySpecific:
        case FactKind::ActorDecl:
        case FactKind::PurposeDecl:
        case FactKind::ActionDecl:
            return 1;
        case FactKind::SubjectOf:
        case FactKind::PrerequisiteOf:
        case FactKind::SpecificOf:
        case FactKind::CompatibleWith:
        case FactKind::LegalBasisClaim:
        case FactKind::ProcessingPurposeFor:
            return 2;
        case FactKind::ConsentGiven:
        case FactKind::Contract:
        case FactKind::Dpa:
        case FactKind::HasBeenInformed:
            return 3;
    }
    return 0;
}

namespace {

Fact make(FactKind kind, std::vector<Atom> args, std::optional<LegalBasis> basis = {},
          std::optional<ActorKind> actor = {}) {
    Fact f{kind, std::move(args), basis, actor};
    if (static_cast<int>(f.args.size()) != fact_arity(kind))
        throw MalformedFact("wrong arity for " + f.predicate_name());
    for (const Atom& a : f.args)
        if (!is_valid_atom(a)) throw MalformedFact("invalid atom '" + a + "'");
    if ((kind == FactKind::LegalBasisClaim) != basis.has_value())
        throw MalformedFact("legal basis tag mismatch");
    if ((kind == FactKind::ActorDecl) != actor.has_value())
        throw MalformedFact("actor kind tag mismatch");
    return f;
}

}  // namespace

Fact Fact::subject_of(Atom s, Atom d) { return make(FactKind::SubjectOf, {std::move(s), std::move(d)}); }
Fact Fact::prerequisite_of(Atom a, Atom p) { return make(FactKind::PrerequisiteOf, {std::move(a), std::move(p)}); }
Fact Fact::specific_of(Atom p, Atom parent) { return make(FactKind::SpecificOf, {std::move(p), std::move(parent)}); }
Fact Fact::sufficiently_specific(Atom p) { return make(FactKind::SufficientlySpecific, {std::move(p)}); }
Fact Fact::compatible_with(Atom p, Atom parent) { return make(FactKind::CompatibleWith, {std::move(p), std::move(parent)}); }
Fact Fact::legal_basis_claim(LegalBasis b, Atom c, Atom p) { return make(FactKind::LegalBasisClaim, {std::move(c), std::move(p)}, b); }
Fact Fact::consent_given(Atom s, Atom c, Atom p) { return make(FactKind::ConsentGiven, {std::move(s), std::move(c), std::move(p)}); }
Fact Fact::contract(Atom s, Atom c, Atom p) { return make(FactKind::Contract, {std::move(s), std::move(c), std::move(p)}); }
Fact Fact::dpa(Atom c, Atom u, Atom p) { return make(FactKind::Dpa, {std::move(c), std::move(u), std::move(p)}); }
Fact Fact::has_been_informed(Atom s, Atom c, Atom p) { return make(FactKind::HasBeenInformed, {std::move(s), std::move(c), std::move(p)}); }
Fact Fact::asset(Atom d) { return make(FactKind::Asset, {std::move(d)}); }
Fact Fact::actor_decl(ActorKind k, Atom id) { return make(FactKind::ActorDecl, {std::move(id)}, {}, k); }
Fact Fact::purpose_decl(Atom p) { return make(FactKind::PurposeDecl, {std::move(p)}); }
Fact Fact::action_decl(Atom a) { return make(FactKind::ActionDecl, {std::move(a)}); }
Fact Fact::processing_purpose_for(Atom a, Atom p) { return make(FactKind::ProcessingPurposeFor, {std::move(a), std::move(p)}); }

std::optional<Fact> Fact::from_predicate(const std::string& name, const std::vector<Atom>& args) {
    static const std::array<std::pair<const char*, FactKind>, 10> plain = {{
        {"subject-of", FactKind::SubjectOf},
        {"prerequisite-of", FactKind::PrerequisiteOf},
        {"specific-of", FactKind::SpecificOf},
        {"sufficiently-specific", FactKind::SufficientlySpecific},
        {"compatible-with", FactKind::CompatibleWith},
        {"consent-given", FactKind::ConsentGiven},
        {"contract", FactKind::Contract},
        {"dpa", FactKind::Dpa},
        {"has-been-informed", FactKind::HasBeenInformed},
        {"processing-purpose-for", FactKind::ProcessingPurposeFor},
    }};
    for (const auto& [n, kind] : plain)
        if (name == n) return make(kind, args);
    if (name == "asset") return make(FactKind::Asset, args);
    if (name == "purpose") return make(FactKind::PurposeDecl, args);
    if (name == "action") return make(FactKind::ActionDecl, args);
    for (ActorKind k : {ActorKind::Controller, ActorKind::Processor, ActorKind::Subject,
                        ActorKind::Authority}) {
        if (name == pbac::to_string(k)) return make(FactKind::ActorDecl, args, {}, k);
    }
    constexpr const char* prefix = "legal-basis-";
    if (name.rfind(prefix, 0) == 0) {
        if (auto b = legal_basis_from_string(name.substr(12)))
            return make(FactKind::LegalBasisClaim, args, *b);
    }
    return std::nullopt;
}

std::string Fact::predicate_name() const {
    switch (kind) {
        case FactKind::SubjectOf: return "subject-of";
        case FactKind::PrerequisiteOf: return "prerequisite-of";
        case FactKind::SpecificOf: return "specific-of";
        case FactKind::SufficientlySpecific: return "sufficiently-specific";
        case FactKind::CompatibleWith: return "compatible-with";
        case FactKind::LegalBasisClaim:
            return std::string("legal-basis-") + pbac::to_string(basis.value_or(LegalBasis::Consent));
        case FactKind::ConsentGiven: return "consent-given";
        case FactKind::Contract: return "contract";
        case FactKind::Dpa: return "dpa";
        case FactKind::HasBeenInformed: return "has-been-informed";
        case FactKind::Asset: return "asset";
        case FactKind::ActorDecl: return pbac::to_string(actor_kind.value_or(ActorKind::Controller));
        case FactKind::PurposeDecl: return "purpose";
        case FactKind::ActionDecl: return "action";
        case FactKind::ProcessingPurposeFor: return "processing-purpose-for";
    }
    return "?";
}

std::string Fact::to_string() const {
    std::string out = predicate_name();
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ',';
        out += args[i];
    }
    out += ')';
    return out;
}

bool capability_licenses(Capability cap, FactKind kind) {
    switch (cap) {
        case Capability::Control:
            return kind == FactKind::LegalBasisClaim || kind == FactKind::Dpa ||
                   kind == FactKind::HasBeenInformed || kind == FactKind::Contract ||
                   kind == FactKind::ActorDecl;
        case Capability::Qualify:
            return kind == FactKind::PrerequisiteOf || kind == FactKind::CompatibleWith ||
                   kind == FactKind::SpecificOf || kind == FactKind::SufficientlySpecific ||
                   kind == FactKind::PurposeDecl || kind == FactKind::ActionDecl ||
                   kind == FactKind::ProcessingPurposeFor;
        case Capability::Collect:
            return kind == FactKind::Asset || kind == FactKind::SubjectOf;
        case Capability::Perform:
            return false;  // requests flow through the decision path, not assertion
        case Capability::Consent:
            return kind == FactKind::ConsentGiven;
    }
    return false;
}

Capability default_capability_for(FactKind kind) {
    for (Capability c : {Capability::Control, Capability::Qualify, Capability::Collect,
                         Capability::Consent}) {
        if (capability_licenses(c, kind)) return c;
    }
    return Capability::Qualify;
}

void validate_provenance(const Provenance& p) {
    if (!is_valid_atom(p.asserted_by))
        throw MalformedFact("invalid provenance asserted_by '" + p.asserted_by + "'");
    if (p.expires_at && *p.expires_at <= p.asserted_at)
        throw MalformedFact("expires_at must be strictly after asserted_at");
}

void validate_request(const Request& r) {
    for (const Atom* a : {&r.actor, &r.action, &r.purpose, &r.asset})
        if (!is_valid_atom(*a))
            throw MalformedRequest("invalid request atom '" + *a + "'");
}

}  // namespace pbac
