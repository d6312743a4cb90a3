#include "pbac/validate.hpp"

#include <algorithm>
#include <map>

#include "pbac/derive.hpp"

namespace pbac {

const char* to_string(ValidationWarning::Code c) {
    switch (c) {
        case ValidationWarning::Code::SpecificOfCycle: return "w1-specific-of-cycle";
        case ValidationWarning::Code::InactiveClaim: return "w2-inactive-claim";
        case ValidationWarning::Code::AssetWithoutSubjects: return "w3-asset-without-subjects";
        case ValidationWarning::Code::DanglingDpa: return "w4-dangling-dpa";
    }
    return "?";
}

bool ValidationReport::has(ValidationWarning::Code c) const {
    return std::any_of(warnings.begin(), warnings.end(),
                       [c](const ValidationWarning& w) { return w.code == c; });
}

ValidationReport validate_graph(const PurposeGraph& g) {
    ValidationReport report;
    DerivedState st = saturate(g);
    const Sorts& sorts = st.sorts;

    // w1: cycles among asserted specific-of edges. The closure stays well
    // defined, so this is a warning, found via reachability both ways.
    std::map<Atom, std::set<Atom>> succ;
    for (const auto& [f, prov] : g.facts())
        if (f.kind == FactKind::SpecificOf) succ[f.args[0]].insert(f.args[1]);
    std::set<Atom> flagged;
    for (const auto& [p, q] : st.specific_of_closure) {
        if (p == q) {
            bool self_loop = succ.count(p) && succ.at(p).count(p);
            bool in_cycle = false;
            for (const auto& [x, y] : st.specific_of_closure)
                if (x == p && y != p && st.specific_of_closure.count({y, p})) in_cycle = true;
            if ((self_loop || in_cycle) && flagged.insert(p).second)
                report.warnings.push_back({ValidationWarning::Code::SpecificOfCycle,
                                           "specific-of cycle through '" + p + "'"});
        }
    }

    // w2: a claim whose purpose can never become sufficiently specific can
    // never produce a legal basis.
    for (const auto& [f, prov] : g.facts()) {
        if (f.kind != FactKind::LegalBasisClaim) continue;
        if (!st.sufficiently_specific.count(f.args[1]))
            report.warnings.push_back(
                {ValidationWarning::Code::InactiveClaim,
                 f.to_string() + ": purpose '" + f.args[1] + "' has no sufficiently-specific path"});
    }

    // w3: empty subject set makes every universal premise hold vacuously.
    for (const Atom& d : sorts.assets)
        if (subjects_of_asset(g, d).empty())
            report.warnings.push_back({ValidationWarning::Code::AssetWithoutSubjects,
                                       "asset '" + d + "' has no subject-of edges"});

    // w4: dpa actors that appear nowhere outside the dpa itself.
    for (const auto& [f, prov] : g.facts()) {
        if (f.kind != FactKind::Dpa) continue;
        auto mentioned_elsewhere = [&](const Atom& a) {
            for (const auto& [other, p2] : g.facts()) {
                if (other == f || other.kind == FactKind::Dpa) continue;
                for (const Atom& arg : other.args)
                    if (arg == a) return true;
            }
            return false;
        };
        for (int i = 0; i < 2; ++i)
            if (!mentioned_elsewhere(f.args[i]))
                report.warnings.push_back(
                    {ValidationWarning::Code::DanglingDpa,
                     f.to_string() + ": actor '" + f.args[i] + "' is not declared elsewhere"});
    }

    std::stable_sort(report.warnings.begin(), report.warnings.end(),
                     [](const ValidationWarning& a, const ValidationWarning& b) {
                         return std::tie(a.code, a.message) < std::tie(b.code, b.message);
                     });
    return report;
}

}  // namespace pbac
