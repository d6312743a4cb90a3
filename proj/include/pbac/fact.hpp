#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbac/errors.hpp"

namespace pbac {

// Atoms are opaque, case-sensitive labels. No meaning is read out of a name.
using Atom = std::string;

bool is_valid_atom(const Atom& a);

enum class ActorKind { Controller, Processor, Subject, Authority };

enum class LegalBasis {
    Consent,
    Contract,
    LegalObligation,
    VitalInterest,
    PublicInterest,
    LegitimateInterest,
};

// Policy administration capabilities licensing purpose-graph contributions.
enum class Capability { Control, Qualify, Collect, Perform, Consent };

enum class FactKind {
    SubjectOf,             // subject-of(S, D)
    PrerequisiteOf,        // prerequisite-of(A, P)
    SpecificOf,            // specific-of(P, P')
    SufficientlySpecific,  // sufficiently-specific(P)
    CompatibleWith,        // compatible-with(P, P')
    LegalBasisClaim,       // legal-basis-<basis>(C, P)
    ConsentGiven,          // consent-given(S, C, P)
    Contract,              // contract(S, C, P)
    Dpa,                   // dpa(C, U, P)
    HasBeenInformed,       // has-been-informed(S, C, P)
    Asset,                 // asset(D)
    ActorDecl,             // controller(X) | processor(X) | subject(X) | authority(X)
    PurposeDecl,           // purpose(P)
    ActionDecl,            // action(A)
    ProcessingPurposeFor,  // processing-purpose-for(A, P)
};

const char* to_string(ActorKind k);
const char* to_string(LegalBasis b);
const char* to_string(Capability c);
std::optional<Capability> capability_from_string(const std::string& s);
std::optional<LegalBasis> legal_basis_from_string(const std::string& s);

// A fact is a value; equality is structural and provenance plays no part in it.
struct Fact {
    FactKind kind;
    std::vector<Atom> args;
    std::optional<LegalBasis> basis;     // LegalBasisClaim only
    std::optional<ActorKind> actor_kind; // ActorDecl only

    static Fact subject_of(Atom s, Atom d);
    static Fact prerequisite_of(Atom a, Atom p);
    static Fact specific_of(Atom p, Atom parent);
    static Fact sufficiently_specific(Atom p);
    static Fact compatible_with(Atom p, Atom parent);
    static Fact legal_basis_claim(LegalBasis b, Atom c, Atom p);
    static Fact consent_given(Atom s, Atom c, Atom p);
    static Fact contract(Atom s, Atom c, Atom p);
    static Fact dpa(Atom c, Atom u, Atom p);
    static Fact has_been_informed(Atom s, Atom c, Atom p);
    static Fact asset(Atom d);
    static Fact actor_decl(ActorKind k, Atom id);
    static Fact purpose_decl(Atom p);
    static Fact action_decl(Atom a);
    static Fact processing_purpose_for(Atom a, Atom p);

    // Builds a fact from its DSL predicate name, throwing MalformedFact on a
    // bad arity or atom. Returns nullopt for names that are not fact predicates.
    static std::optional<Fact> from_predicate(const std::string& name,
                                              const std::vector<Atom>& args);

    // DSL rendering, e.g. "subject-of(Alice,AlicesRecords)".
    std::string predicate_name() const;
    std::string to_string() const;

    friend auto operator<=>(const Fact&, const Fact&) = default;
};

// Expected argument count for a fact kind.
int fact_arity(FactKind k);

// Table of which capability licenses asserting/retracting which fact kind.
bool capability_licenses(Capability cap, FactKind kind);
Capability default_capability_for(FactKind kind);

struct Provenance {
    Atom asserted_by;
    Capability capability = Capability::Qualify;
    std::int64_t asserted_at = 0;  // UTC seconds
    std::optional<std::int64_t> expires_at;
    std::optional<std::string> signature;  // opaque, stored and echoed, never verified

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Throws MalformedFact if expires_at is not strictly after asserted_at.
void validate_provenance(const Provenance& p);

struct Request {
    Atom actor;
    Atom action;
    Atom purpose;
    Atom asset;
    std::string request_id;

    friend auto operator<=>(const Request&, const Request&) = default;
};

// Throws MalformedRequest on an empty or invalid atom.
void validate_request(const Request& r);

}  // namespace pbac
