#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pbac/graph.hpp"

namespace pbac {

// Identifiers of the inference rules. AXIOM marks an asserted fact.
enum class RuleId {
    Axiom,
    ControllerIsProcessor,  // EQ2
    Dpa,                    // EQ3
    LegitimateInterest,     // EQ4
    ConsentBasis,           // EQ5
    ContractBasis,          // EQ4x
    LegalObligationBasis,   // EQ4x
    VitalInterestBasis,     // EQ4x
    PublicInterestBasis,    // EQ4x
    ContractInforms,        // EQ6
    ConsentInforms,
    Specific,               // EQ7
    Compatible,             // EQ8
    SpecificityProp,        // EQ9
    Transitive,             // EQ10
    Reflexive,              // EQ11
    Ternary,                // EQ12
    PropConsentSpecific,
    PropContractSpecific,
};

const char* to_string(RuleId r);
std::optional<RuleId> rule_from_string(const std::string& s);
RuleId legal_basis_rule(LegalBasis b);
// Inverse of legal_basis_rule; nullopt for non-basis rules.
std::optional<LegalBasis> basis_for_rule(RuleId r);

// Derived predicates tracked by the fixpoint.
enum class DerivedPred {
    SpecificOf,            // reflexive-transitive closure pairs (P, P')
    SufficientlySpecific,  // (P)
    Informed,              // (S, C, P)
    Consent,               // consent closed under specificity (S, C, P)
    Contract,              // contract closed under specificity (S, C, P)
    LegalBasis,            // (C, P, D)
    ProcessorFor,          // (U, C, P)
};

struct DerivedTuple {
    DerivedPred pred;
    std::array<Atom, 3> args;  // unused slots stay empty

    std::string to_string() const;
    friend auto operator<=>(const DerivedTuple&, const DerivedTuple&) = default;
};

DerivedTuple d_specific_of(Atom p, Atom parent);
DerivedTuple d_sufficiently_specific(Atom p);
DerivedTuple d_informed(Atom s, Atom c, Atom p);
DerivedTuple d_consent(Atom s, Atom c, Atom p);
DerivedTuple d_contract(Atom s, Atom c, Atom p);
DerivedTuple d_legal_basis(Atom c, Atom p, Atom d);
DerivedTuple d_processor_for(Atom u, Atom c, Atom p);

// How one derived tuple was first obtained: the rule applied, the asserted
// facts consumed directly, the derived tuples consumed, and (for legal-basis)
// the per-subject instances of the universal premises.
struct DerivationLink {
    RuleId rule = RuleId::Axiom;
    std::vector<Fact> fact_premises;
    std::vector<DerivedTuple> tuple_premises;
    std::vector<std::pair<Atom, DerivedTuple>> forall_premises;
};

// Least fixpoint of the rule set over a graph's asserted facts. The strata
// feed forward only (closure -> specificity -> consent/contract -> informed
// -> legal basis), so each set is computed once, in order, with an inner
// fixpoint for the transitive closure.
struct DerivedState {
    Sorts sorts;
    std::set<std::pair<Atom, Atom>> specific_of_closure;
    std::set<Atom> sufficiently_specific;
    std::set<std::array<Atom, 3>> informed;        // (S, C, P)
    std::set<std::array<Atom, 3>> consent_closed;  // (S, C, P)
    std::set<std::array<Atom, 3>> contract_closed; // (S, C, P)
    std::set<std::array<Atom, 3>> legal_basis;     // (C, P, D)
    std::set<std::array<Atom, 3>> processor_for;   // (U, C, P)
    std::map<DerivedTuple, DerivationLink> links;

    bool has(const DerivedTuple& t) const { return links.count(t) != 0; }
};

// extra_assets join the asset sort for legal-basis derivation: an asset named
// only by a request is still a valid instance (with no subjects, so universal
// premises hold vacuously; validation flags such assets separately).
DerivedState saturate(const PurposeGraph& g, const std::set<Atom>& extra_assets = {});

}  // namespace pbac
