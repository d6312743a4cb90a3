#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbac/derive.hpp"

namespace pbac {

// Recorded proof of a conclusion. Leaves are AXIOM nodes whose conclusions
// are asserted facts, or applications of the premise-free rules (reflexivity
// of specific-of, controller-is-processor identity).
struct DerivationTree {
    std::string conclusion;
    RuleId rule = RuleId::Axiom;
    std::vector<DerivationTree> children;
    // Universally quantified premises, one or more entries per subject of the
    // asset in scope; the subject set is exactly {S : subject-of(S, D)}.
    std::vector<std::pair<Atom, DerivationTree>> forall_block;

    // Canonical indented text; bit-exact across runs for equal inputs.
    std::string to_text() const;
    // Asserted-fact leaves (premise-free rule nodes excluded).
    std::vector<std::string> axiom_leaves() const;

    friend bool operator==(const DerivationTree&, const DerivationTree&) = default;
};

struct PremiseStatus {
    std::string premise;
    bool satisfied = false;
    std::vector<Atom> failing_subjects;  // for universal premises

    friend bool operator==(const PremiseStatus&, const PremiseStatus&) = default;
};

// Why a request was denied: the request-level premises plus, per candidate
// rule and per anchor purpose carrying a legal-basis claim, the status of
// every premise of that rule instance.
struct Diagnosis {
    struct Candidate {
        RuleId rule = RuleId::Specific;
        Atom controller;
        Atom anchor;  // P' of the legal-basis claim
        LegalBasis basis = LegalBasis::Consent;
        std::vector<PremiseStatus> premises;

        friend bool operator==(const Candidate&, const Candidate&) = default;
    };

    std::vector<PremiseStatus> request_premises;
    std::vector<Candidate> candidates;
    std::string note;  // set when no candidate exists at all

    std::string to_text() const;

    friend bool operator==(const Diagnosis&, const Diagnosis&) = default;
};

struct Decision {
    enum class Outcome { Permit, Deny };

    Outcome outcome = Outcome::Deny;
    Request request;
    std::optional<DerivationTree> tree;   // Permit only
    std::optional<Diagnosis> diagnosis;   // Deny only
    std::uint64_t graph_version = 0;
    std::int64_t decided_at = 0;  // stamped by the caller; decide itself is pure

    bool permitted() const { return outcome == Outcome::Permit; }
};

const char* to_string(Decision::Outcome o);

// Decides lawful-request(U, A, P, D). Permit carries the proof for the first
// satisfying (rule, anchor, controller) witness under the deterministic order:
// EQ7 before EQ8, anchor purposes in atom order, controllers in atom order.
Decision decide_request(const PurposeGraph& g, const Request& r);

// Same, against a pre-saturated state (must come from the same graph).
Decision decide_request(const PurposeGraph& g, const DerivedState& st, const Request& r);

// Ternary variant: picks the first purpose P (atom order) with an asserted
// processing-purpose-for(action, P) whose quaternary request is permitted.
// Off by default; throws FeatureDisabled unless enabled.
Decision decide_ternary(const PurposeGraph& g, const Atom& actor, const Atom& action,
                        const Atom& asset, bool enabled, const std::string& request_id = "");

}  // namespace pbac
