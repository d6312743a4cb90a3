#include "pbac/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "pbac/dsl.hpp"

namespace pbac {

PurposeGraph load_graph_text(const std::string& text, const Atom& default_by) {
    dsl::Program prog = dsl::parse_program(text);
    dsl::ExecOptions opts;
    opts.default_by = default_by;
    PurposeGraph g;
    for (const auto& s : prog.statements) {
        if (std::holds_alternative<dsl::CommentStmt>(s)) continue;
        const auto* a = std::get_if<dsl::AssertStmt>(&s);
        if (!a) throw MalformedFact("graph files may only contain facts and comments");
        g = assert_fact(g, a->fact, dsl::provenance_for(*a, opts));
    }
    return g;
}

PurposeGraph load_graph_file(const std::string& path, const Atom& default_by) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_graph_text(buf.str(), default_by);
}

std::string save_graph_text(const PurposeGraph& g) {
    dsl::Program prog;
    for (const auto& [fact, prov] : g.facts()) {
        dsl::AssertStmt a;
        a.fact = fact;
        a.prov = dsl::ProvAnnotation{prov.asserted_by, prov.capability, prov.expires_at};
        prog.statements.push_back(a);
    }
    return dsl::format_program(prog);
}

namespace {

std::string quoted(const Atom& a) { return "\"" + a + "\""; }

}  // namespace

std::string to_dot(const PurposeGraph& g) {
    Sorts sorts = derive_sorts(g);
    std::ostringstream out;
    out << "digraph purpose_graph {\n";
    out << "  rankdir=BT;\n";
    for (const Atom& p : sorts.purposes) {
        bool ss = g.contains(Fact::sufficiently_specific(p));
        out << "  " << quoted(p) << " [shape=ellipse,style=filled,fillcolor=lightgrey,label="
            << quoted(ss ? p + "\\n(ss)" : p) << "];\n";
    }
    for (const Atom& a : sorts.actions)
        out << "  " << quoted(a) << " [shape=ellipse,style=dotted];\n";
    for (const Atom& d : sorts.assets)
        out << "  " << quoted(d) << " [shape=box,style=dashed];\n";
    for (const Atom& s : sorts.subjects)
        out << "  " << quoted(s) << " [shape=plaintext];\n";
    for (const Atom& c : sorts.controllers)
        if (!sorts.subjects.count(c)) out << "  " << quoted(c) << " [shape=plaintext];\n";

    for (const auto& [f, prov] : g.facts()) {
        switch (f.kind) {
            case FactKind::PrerequisiteOf:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1])
                    << " [label=\"po\"];\n";
                break;
            case FactKind::SpecificOf:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1])
                    << " [label=\"so\"];\n";
                break;
            case FactKind::CompatibleWith:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1])
                    << " [label=\"cw\",style=dashed];\n";
                break;
            case FactKind::SubjectOf:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1])
                    << " [label=\"subject-of\",style=dotted,arrowhead=none];\n";
                break;
            case FactKind::LegalBasisClaim:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1]) << " [label="
                    << quoted("legal-basis-" + std::string(to_string(*f.basis))) << "];\n";
                break;
            case FactKind::Contract:
            case FactKind::ConsentGiven:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[2]) << " [label="
                    << quoted(f.predicate_name() + "(" + f.args[1] + ")") << ",style=dotted];\n";
                break;
            case FactKind::Dpa:
                out << "  " << quoted(f.args[0]) << " -> " << quoted(f.args[1]) << " [label="
                    << quoted("dpa(" + f.args[2] + ")") << "];\n";
                break;
            default:
                break;
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace pbac
