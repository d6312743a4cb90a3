#include "pbac/derive.hpp"

namespace pbac {

const char* to_string(RuleId r) {
    switch (r) {
        case RuleId::Axiom: return "AXIOM";
        case RuleId::ControllerIsProcessor: return "EQ2-CONTROLLER-IS-PROCESSOR";
        case RuleId::Dpa: return "EQ3-DPA";
        case RuleId::LegitimateInterest: return "EQ4-LEGITIMATE-INTEREST";
        case RuleId::ConsentBasis: return "EQ5-CONSENT";
        case RuleId::ContractBasis: return "EQ4x-CONTRACT";
        case RuleId::LegalObligationBasis: return "EQ4x-LEGAL-OBLIGATION";
        case RuleId::VitalInterestBasis: return "EQ4x-VITAL-INTEREST";
        case RuleId::PublicInterestBasis: return "EQ4x-PUBLIC-INTEREST";
        case RuleId::ContractInforms: return "EQ6-CONTRACT-INFORMS";
        case RuleId::ConsentInforms: return "CONSENT-INFORMS";
        case RuleId::Specific: return "EQ7-SPECIFIC";
        case RuleId::Compatible: return "EQ8-COMPATIBLE";
        case RuleId::SpecificityProp: return "EQ9-SPECIFICITY-PROP";
        case RuleId::Transitive: return "EQ10-TRANSITIVE";
        case RuleId::Reflexive: return "EQ11-REFLEXIVE";
        case RuleId::Ternary: return "EQ12-TERNARY";
        case RuleId::PropConsentSpecific: return "PROP-CONSENT-SPECIFIC";
        case RuleId::PropContractSpecific: return "PROP-CONTRACT-SPECIFIC";
    }
    return "?";
}

std::optional<RuleId> rule_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(RuleId::PropContractSpecific); ++i) {
        auto r = static_cast<RuleId>(i);
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

std::optional<LegalBasis> basis_for_rule(RuleId r) {
    switch (r) {
        case RuleId::ConsentBasis: return LegalBasis::Consent;
        case RuleId::ContractBasis: return LegalBasis::Contract;
        case RuleId::LegalObligationBasis: return LegalBasis::LegalObligation;
        case RuleId::VitalInterestBasis: return LegalBasis::VitalInterest;
        case RuleId::PublicInterestBasis: return LegalBasis::PublicInterest;
        case RuleId::LegitimateInterest: return LegalBasis::LegitimateInterest;
        default: return std::nullopt;
    }
}

RuleId legal_basis_rule(LegalBasis b) {
    switch (b) {
        case LegalBasis::Consent: return RuleId::ConsentBasis;
        case LegalBasis::Contract: return RuleId::ContractBasis;
        case LegalBasis::LegalObligation: return RuleId::LegalObligationBasis;
        case LegalBasis::VitalInterest: return RuleId::VitalInterestBasis;
        case LegalBasis::PublicInterest: return RuleId::PublicInterestBasis;
        case LegalBasis::LegitimateInterest: return RuleId::LegitimateInterest;
    }
    return RuleId::ConsentBasis;
}

DerivedTuple d_specific_of(Atom p, Atom parent) { return {DerivedPred::SpecificOf, {std::move(p), std::move(parent), {}}}; }
DerivedTuple d_sufficiently_specific(Atom p) { return {DerivedPred::SufficientlySpecific, {std::move(p), {}, {}}}; }
DerivedTuple d_informed(Atom s, Atom c, Atom p) { return {DerivedPred::Informed, {std::move(s), std::move(c), std::move(p)}}; }
DerivedTuple d_consent(Atom s, Atom c, Atom p) { return {DerivedPred::Consent, {std::move(s), std::move(c), std::move(p)}}; }
DerivedTuple d_contract(Atom s, Atom c, Atom p) { return {DerivedPred::Contract, {std::move(s), std::move(c), std::move(p)}}; }
DerivedTuple d_legal_basis(Atom c, Atom p, Atom d) { return {DerivedPred::LegalBasis, {std::move(c), std::move(p), std::move(d)}}; }
DerivedTuple d_processor_for(Atom u, Atom c, Atom p) { return {DerivedPred::ProcessorFor, {std::move(u), std::move(c), std::move(p)}}; }

std::string DerivedTuple::to_string() const {
    const char* name = "?";
    int arity = 3;
    switch (pred) {
        case DerivedPred::SpecificOf: name = "specific-of"; arity = 2; break;
        case DerivedPred::SufficientlySpecific: name = "sufficiently-specific"; arity = 1; break;
        case DerivedPred::Informed: name = "has-been-informed"; break;
        case DerivedPred::Consent: name = "consent-given"; break;
        case DerivedPred::Contract: name = "contract"; break;
        case DerivedPred::LegalBasis: name = "legal-basis"; break;
        case DerivedPred::ProcessorFor: name = "processor-for"; break;
    }
    std::string out = name;
    out += '(';
    for (int i = 0; i < arity; ++i) {
        if (i) out += ',';
        out += args[i];
    }
    out += ')';
    return out;
}

namespace {

struct Builder {
    const PurposeGraph& g;
    DerivedState st;

    bool add(const DerivedTuple& t, DerivationLink link) {
        auto [it, inserted] = st.links.emplace(t, std::move(link));
        if (!inserted) return false;
        switch (t.pred) {
            case DerivedPred::SpecificOf: st.specific_of_closure.insert({t.args[0], t.args[1]}); break;
            case DerivedPred::SufficientlySpecific: st.sufficiently_specific.insert(t.args[0]); break;
            case DerivedPred::Informed: st.informed.insert(t.args); break;
            case DerivedPred::Consent: st.consent_closed.insert(t.args); break;
            case DerivedPred::Contract: st.contract_closed.insert(t.args); break;
            case DerivedPred::LegalBasis: st.legal_basis.insert(t.args); break;
            case DerivedPred::ProcessorFor: st.processor_for.insert(t.args); break;
        }
        return true;
    }

    void axiom(const DerivedTuple& t, const Fact& f) {
        add(t, {RuleId::Axiom, {f}, {}, {}});
    }
};

}  // namespace

DerivedState saturate(const PurposeGraph& g, const std::set<Atom>& extra_assets) {
    Builder b{g, {}};
    b.st.sorts = derive_sorts(g);
    b.st.sorts.assets.insert(extra_assets.begin(), extra_assets.end());
    const Sorts& sorts = b.st.sorts;

    std::vector<Fact> specific_edges, consents, contracts, informs, claims, dpas;
    for (const auto& [f, prov] : g.facts()) {
        switch (f.kind) {
            case FactKind::SpecificOf: specific_edges.push_back(f); break;
            case FactKind::ConsentGiven: consents.push_back(f); break;
            case FactKind::Contract: contracts.push_back(f); break;
            case FactKind::HasBeenInformed: informs.push_back(f); break;
            case FactKind::LegalBasisClaim: claims.push_back(f); break;
            case FactKind::Dpa: dpas.push_back(f); break;
            default: break;
        }
    }

    // specific-of closure: asserted edges, reflexivity over the purpose sort,
    // then transitive steps against asserted edges until nothing new appears.
    for (const Fact& f : specific_edges) b.axiom(d_specific_of(f.args[0], f.args[1]), f);
    for (const Atom& p : sorts.purposes)
        b.add(d_specific_of(p, p), {RuleId::Reflexive, {}, {}, {}});
    for (bool grew = true; grew;) {
        grew = false;
        // snapshot: iteration order must not see pairs added this round
        auto pairs = b.st.specific_of_closure;
        for (const auto& [x, y] : pairs) {
            for (const Fact& e : specific_edges) {
                if (e.args[0] != y || x == e.args[1]) continue;
                grew |= b.add(d_specific_of(x, e.args[1]),
                              {RuleId::Transitive, {e}, {d_specific_of(x, y)}, {}});
            }
        }
    }

    // sufficiently-specific: asserted, then one downward pass along the closure.
    for (const auto& [f, prov] : g.facts())
        if (f.kind == FactKind::SufficientlySpecific)
            b.axiom(d_sufficiently_specific(f.args[0]), f);
    for (const Atom& p : sorts.purposes) {
        if (b.st.sufficiently_specific.count(p)) continue;
        for (const auto& [x, y] : b.st.specific_of_closure) {
            if (x != p || !g.contains(Fact::sufficiently_specific(y))) continue;
            b.add(d_sufficiently_specific(p),
                  {RuleId::SpecificityProp, {Fact::sufficiently_specific(y)},
                   {d_specific_of(x, y)}, {}});
            break;  // closure pairs are in atom order; first witness is canonical
        }
    }

    // consent and contract propagate to more-specific purposes.
    for (const Fact& f : consents) b.axiom(d_consent(f.args[0], f.args[1], f.args[2]), f);
    for (const Fact& f : consents)
        for (const auto& [x, y] : b.st.specific_of_closure)
            if (y == f.args[2] && x != y)
                b.add(d_consent(f.args[0], f.args[1], x),
                      {RuleId::PropConsentSpecific, {f}, {d_specific_of(x, y)}, {}});
    for (const Fact& f : contracts) b.axiom(d_contract(f.args[0], f.args[1], f.args[2]), f);
    for (const Fact& f : contracts)
        for (const auto& [x, y] : b.st.specific_of_closure)
            if (y == f.args[2] && x != y)
                b.add(d_contract(f.args[0], f.args[1], x),
                      {RuleId::PropContractSpecific, {f}, {d_specific_of(x, y)}, {}});

    // informed-ness: asserted, implied by a contract, implied by given consent.
    for (const Fact& f : informs) b.axiom(d_informed(f.args[0], f.args[1], f.args[2]), f);
    for (const auto& t : b.st.contract_closed)
        b.add({DerivedPred::Informed, t},
              {RuleId::ContractInforms, {}, {{DerivedPred::Contract, t}}, {}});
    for (const auto& t : b.st.consent_closed)
        b.add({DerivedPred::Informed, t},
              {RuleId::ConsentInforms, {}, {{DerivedPred::Consent, t}}, {}});

    // processor-for: controllers act for themselves; a DPA delegates.
    for (const Atom& c : sorts.controllers)
        for (const Atom& p : sorts.purposes)
            b.add(d_processor_for(c, c, p), {RuleId::ControllerIsProcessor, {}, {}, {}});
    for (const Fact& f : dpas)
        b.add(d_processor_for(f.args[1], f.args[0], f.args[2]), {RuleId::Dpa, {f}, {}, {}});

    // legal-basis per claim and asset. All bases are gated on the claimed
    // purpose being sufficiently specific and on every subject of the asset
    // being informed; consent/contract additionally quantify their own
    // relation over the subjects. An asset without subjects passes vacuously.
    for (const Fact& claim : claims) {
        const Atom& c = claim.args[0];
        const Atom& p = claim.args[1];
        if (!b.st.sufficiently_specific.count(p)) continue;
        for (const Atom& d : sorts.assets) {
            std::vector<Atom> subjects = subjects_of_asset(g, d);
            bool ok = true;
            DerivationLink link{legal_basis_rule(*claim.basis), {claim},
                                {d_sufficiently_specific(p)}, {}};
            for (const Atom& s : subjects) {
                if (*claim.basis == LegalBasis::Consent) {
                    if (!b.st.consent_closed.count({s, c, p})) { ok = false; break; }
                    link.forall_premises.push_back({s, d_consent(s, c, p)});
                } else if (*claim.basis == LegalBasis::Contract) {
                    if (!b.st.contract_closed.count({s, c, p})) { ok = false; break; }
                    link.forall_premises.push_back({s, d_contract(s, c, p)});
                }
                if (!b.st.informed.count({s, c, p})) { ok = false; break; }
                link.forall_premises.push_back({s, d_informed(s, c, p)});
            }
            if (ok) b.add(d_legal_basis(c, p, d), std::move(link));
        }
    }

    return b.st;
}

}  // namespace pbac
