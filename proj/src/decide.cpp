#include "pbac/decide.hpp"

#include <algorithm>

namespace pbac {

const char* to_string(Decision::Outcome o) {
    return o == Decision::Outcome::Permit ? "permit" : "deny";
}

namespace {

void render(const DerivationTree& t, std::string& out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += t.conclusion;
    out += " [";
    out += to_string(t.rule);
    out += "]\n";
    for (const auto& c : t.children) render(c, out, depth + 1);
    for (const auto& [subject, tree] : t.forall_block) {
        out.append(static_cast<std::size_t>(depth + 1) * 2, ' ');
        out += "forall ";
        out += subject;
        out += ":\n";
        render(tree, out, depth + 2);
    }
}

void collect_axioms(const DerivationTree& t, std::vector<std::string>& out) {
    if (t.rule == RuleId::Axiom) out.push_back(t.conclusion);
    for (const auto& c : t.children) collect_axioms(c, out);
    for (const auto& [s, tree] : t.forall_block) collect_axioms(tree, out);
}

DerivationTree axiom_node(const std::string& conclusion) {
    return {conclusion, RuleId::Axiom, {}, {}};
}

// Expands a derived tuple into its recorded derivation.
DerivationTree expand(const DerivedState& st, const DerivedTuple& t) {
    DerivationTree node{t.to_string(), RuleId::Axiom, {}, {}};
    auto it = st.links.find(t);
    if (it == st.links.end()) return node;  // not reachable for saturated tuples
    const DerivationLink& link = it->second;
    node.rule = link.rule;
    if (link.rule == RuleId::Axiom) return node;  // asserted fact, leaf
    for (const Fact& f : link.fact_premises) node.children.push_back(axiom_node(f.to_string()));
    for (const DerivedTuple& p : link.tuple_premises) node.children.push_back(expand(st, p));
    for (const auto& [subject, premise] : link.forall_premises)
        node.forall_block.push_back({subject, expand(st, premise)});
    return node;
}

struct Candidate {
    Atom anchor;      // P' carrying the claim
    Atom controller;  // C of the claim
    LegalBasis basis;
};

std::vector<Candidate> claim_candidates(const PurposeGraph& g) {
    std::vector<Candidate> out;
    for (const auto& [f, prov] : g.facts())
        if (f.kind == FactKind::LegalBasisClaim)
            out.push_back({f.args[1], f.args[0], *f.basis});
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.anchor, a.controller, a.basis) <
               std::tie(b.anchor, b.controller, b.basis);
    });
    return out;
}

std::string forall_premise_text(const char* pred, const Atom& c, const Atom& p, const Atom& d) {
    return std::string("forall S, subject-of(S,") + d + "): " + pred + "(S," + c + "," + p + ")";
}

PremiseStatus universal_status(const PurposeGraph& g, const std::set<std::array<Atom, 3>>& rel,
                               const char* pred, const Atom& c, const Atom& p, const Atom& d) {
    PremiseStatus ps{forall_premise_text(pred, c, p, d), true, {}};
    for (const Atom& s : subjects_of_asset(g, d))
        if (!rel.count({s, c, p})) {
            ps.satisfied = false;
            ps.failing_subjects.push_back(s);
        }
    return ps;
}

}  // namespace

std::string DerivationTree::to_text() const {
    std::string out;
    render(*this, out, 0);
    return out;
}

std::vector<std::string> DerivationTree::axiom_leaves() const {
    std::vector<std::string> out;
    collect_axioms(*this, out);
    return out;
}

std::string Diagnosis::to_text() const {
    std::string out;
    auto line = [&out](int depth, const std::string& text) {
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += text;
        out += '\n';
    };
    for (const auto& ps : request_premises)
        line(0, std::string(ps.satisfied ? "ok  " : "FAIL") + " " + ps.premise);
    if (!note.empty()) line(0, note);
    for (const auto& c : candidates) {
        line(0, std::string("candidate ") + to_string(c.rule) + " via " +
                    to_string(c.basis) + " claim by " + c.controller + " at " + c.anchor + ":");
        for (const auto& ps : c.premises) {
            std::string t = std::string(ps.satisfied ? "ok  " : "FAIL") + " " + ps.premise;
            if (!ps.failing_subjects.empty()) {
                t += " (failing:";
                for (const auto& s : ps.failing_subjects) t += " " + s;
                t += ")";
            }
            line(1, t);
        }
    }
    return out;
}

Decision decide_request(const PurposeGraph& g, const Request& r) {
    validate_request(r);
    return decide_request(g, saturate(g, {r.asset}), r);
}

Decision decide_request(const PurposeGraph& g, const DerivedState& st, const Request& r) {
    validate_request(r);
    // A pre-saturated state may predate this request's asset; re-derive then.
    if (!st.sorts.assets.count(r.asset)) return decide_request(g, r);

    Decision d;
    d.request = r;
    d.graph_version = g.version();

    const bool prereq = g.contains(Fact::prerequisite_of(r.action, r.purpose));
    const std::vector<Candidate> candidates = claim_candidates(g);

    if (prereq) {
        // Witness order: EQ7 before EQ8, anchors in atom order, controllers in
        // atom order (claim_candidates is presorted that way).
        for (RuleId rule : {RuleId::Specific, RuleId::Compatible}) {
            for (const Candidate& cand : candidates) {
                const Atom& c = cand.controller;
                const Atom& anchor = cand.anchor;
                if (!st.legal_basis.count({c, anchor, r.asset})) continue;
                if (!st.processor_for.count({r.actor, c, anchor})) continue;

                DerivationTree root{"lawful-request(" + r.actor + "," + r.action + "," +
                                        r.purpose + "," + r.asset + ")",
                                    rule, {}, {}};
                root.children.push_back(axiom_node("request(" + r.actor + "," + r.action + "," +
                                                   r.purpose + "," + r.asset + ")"));
                root.children.push_back(
                    axiom_node(Fact::prerequisite_of(r.action, r.purpose).to_string()));

                if (rule == RuleId::Specific) {
                    if (!st.specific_of_closure.count({r.purpose, anchor})) continue;
                    root.children.push_back(expand(st, d_specific_of(r.purpose, anchor)));
                } else {
                    if (!g.contains(Fact::compatible_with(r.purpose, anchor))) continue;
                    if (!st.sufficiently_specific.count(r.purpose)) continue;
                    bool informed_ok = true;
                    std::vector<std::pair<Atom, DerivationTree>> block;
                    for (const Atom& s : subjects_of_asset(g, r.asset)) {
                        if (!st.informed.count({s, c, r.purpose})) { informed_ok = false; break; }
                        block.push_back({s, expand(st, d_informed(s, c, r.purpose))});
                    }
                    if (!informed_ok) continue;
                    root.children.push_back(
                        axiom_node(Fact::compatible_with(r.purpose, anchor).to_string()));
                    root.children.push_back(expand(st, d_sufficiently_specific(r.purpose)));
                    root.forall_block = std::move(block);
                }

                root.children.push_back(expand(st, d_legal_basis(c, anchor, r.asset)));
                root.children.push_back(expand(st, d_processor_for(r.actor, c, anchor)));

                d.outcome = Decision::Outcome::Permit;
                d.tree = std::move(root);
                return d;
            }
        }
    }

    // Deny: probe every premise of every candidate rule instance.
    Diagnosis diag;
    diag.request_premises.push_back(
        {Fact::prerequisite_of(r.action, r.purpose).to_string(), prereq, {}});
    if (candidates.empty()) diag.note = "no legal-basis claim asserted";

    for (RuleId rule : {RuleId::Specific, RuleId::Compatible}) {
        for (const Candidate& cand : candidates) {
            const Atom& c = cand.controller;
            const Atom& anchor = cand.anchor;
            Diagnosis::Candidate dc{rule, c, anchor, cand.basis, {}};

            dc.premises.push_back(
                {Fact::legal_basis_claim(cand.basis, c, anchor).to_string(), true, {}});
            dc.premises.push_back({"sufficiently-specific(" + anchor + ")",
                                   st.sufficiently_specific.count(anchor) != 0, {}});
            if (cand.basis == LegalBasis::Consent)
                dc.premises.push_back(
                    universal_status(g, st.consent_closed, "consent-given", c, anchor, r.asset));
            if (cand.basis == LegalBasis::Contract)
                dc.premises.push_back(
                    universal_status(g, st.contract_closed, "contract", c, anchor, r.asset));
            dc.premises.push_back(
                universal_status(g, st.informed, "has-been-informed", c, anchor, r.asset));
            dc.premises.push_back({"processor-for(" + r.actor + "," + c + "," + anchor + ")",
                                   st.processor_for.count({r.actor, c, anchor}) != 0, {}});

            if (rule == RuleId::Specific) {
                dc.premises.push_back({"specific-of(" + r.purpose + "," + anchor + ")",
                                       st.specific_of_closure.count({r.purpose, anchor}) != 0, {}});
            } else {
                dc.premises.push_back(
                    {Fact::compatible_with(r.purpose, anchor).to_string(),
                     g.contains(Fact::compatible_with(r.purpose, anchor)), {}});
                dc.premises.push_back({"sufficiently-specific(" + r.purpose + ")",
                                       st.sufficiently_specific.count(r.purpose) != 0, {}});
                dc.premises.push_back(
                    universal_status(g, st.informed, "has-been-informed", c, r.purpose, r.asset));
            }
            diag.candidates.push_back(std::move(dc));
        }
    }

    d.outcome = Decision::Outcome::Deny;
    d.diagnosis = std::move(diag);
    return d;
}

Decision decide_ternary(const PurposeGraph& g, const Atom& actor, const Atom& action,
                        const Atom& asset, bool enabled, const std::string& request_id) {
    if (!enabled) throw FeatureDisabled("ternary lawful-request is disabled");
    for (const Atom* a : {&actor, &action, &asset})
        if (!is_valid_atom(*a)) throw MalformedRequest("invalid request atom '" + *a + "'");

    DerivedState st = saturate(g, {asset});
    std::vector<Atom> purposes;
    for (const auto& [f, prov] : g.facts())
        if (f.kind == FactKind::ProcessingPurposeFor && f.args[0] == action)
            purposes.push_back(f.args[1]);
    std::sort(purposes.begin(), purposes.end());

    Decision out;
    out.request = {actor, action, "", asset, request_id};
    out.graph_version = g.version();

    Diagnosis diag;
    if (purposes.empty())
        diag.note = "no processing-purpose-for(" + action + ",...) asserted";
    for (const Atom& p : purposes) {
        Decision inner = decide_request(g, st, {actor, action, p, asset, request_id});
        if (inner.permitted()) {
            DerivationTree root{"lawful-request(" + actor + "," + action + "," + asset + ")",
                                RuleId::Ternary, {}, {}};
            root.children.push_back(
                axiom_node(Fact::processing_purpose_for(action, p).to_string()));
            root.children.push_back(std::move(*inner.tree));
            out.outcome = Decision::Outcome::Permit;
            out.request.purpose = p;
            out.tree = std::move(root);
            return out;
        }
        for (auto& cand : inner.diagnosis->candidates) diag.candidates.push_back(cand);
        if (diag.request_premises.empty())
            diag.request_premises = inner.diagnosis->request_premises;
    }
    if (diag.request_premises.empty())
        diag.request_premises.push_back({"processing-purpose-for(" + action + ",...)", false, {}});

    out.outcome = Decision::Outcome::Deny;
    out.diagnosis = std::move(diag);
    return out;
}

}  // namespace pbac
