#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pbac/decide.hpp"
#include "pbac/dsl.hpp"
#include "pbac/graph_io.hpp"
#include "pbac/sim.hpp"
#include "pbac/store.hpp"
#include "pbac/validate.hpp"
#include "pbac/version.hpp"

namespace py = pybind11;

namespace {

pbac::Provenance make_provenance(const std::string& by, const std::string& cap,
                                 std::int64_t at, std::optional<std::int64_t> exp) {
    pbac::Provenance prov;
    prov.asserted_by = by;
    if (auto c = pbac::capability_from_string(cap)) prov.capability = *c;
    prov.asserted_at = at;
    prov.expires_at = exp;
    return prov;
}

py::dict decision_to_dict(const pbac::Decision& d) {
    py::dict out;
    out["outcome"] = std::string(pbac::to_string(d.outcome));
    out["graph_version"] = d.graph_version;
    if (d.tree) {
        out["tree"] = d.tree->to_text();
        out["tree_json"] = pbac::serialize_tree(*d.tree);
    }
    if (d.diagnosis) {
        out["diagnosis"] = d.diagnosis->to_text();
        out["diagnosis_json"] = pbac::serialize_diagnosis(*d.diagnosis);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_pbac, m) {
    m.attr("__version__") = pbac::kProjectVersion;
    m.attr("RULE_SET_VERSION") = pbac::kRuleSetVersion;

    py::register_exception<pbac::Error>(m, "PbacError");

    py::class_<pbac::PurposeGraph>(m, "Graph")
        .def(py::init<>())
        .def_static("from_text", [](const std::string& text) { return pbac::load_graph_text(text); })
        .def_static("from_file", [](const std::string& path) { return pbac::load_graph_file(path); })
        .def_property_readonly("version", &pbac::PurposeGraph::version)
        .def("__len__", &pbac::PurposeGraph::size)
        .def("facts",
             [](const pbac::PurposeGraph& g) {
                 std::vector<std::string> out;
                 for (const auto& [f, p] : g.facts()) out.push_back(f.to_string());
                 return out;
             })
        .def("contains",
             [](const pbac::PurposeGraph& g, const std::string& fact) {
                 return g.contains(pbac::dsl::parse_fact(fact));
             })
        .def(
            "assert_fact",
            [](const pbac::PurposeGraph& g, const std::string& fact, const std::string& by,
               const std::string& cap, std::int64_t at, std::optional<std::int64_t> exp,
               bool enforce) {
                pbac::Fact f = pbac::dsl::parse_fact(fact);
                std::string capability = cap.empty()
                                             ? pbac::to_string(pbac::default_capability_for(f.kind))
                                             : cap;
                return pbac::assert_fact(g, f, make_provenance(by, capability, at, exp), enforce);
            },
            py::arg("fact"), py::arg("by") = "local", py::arg("capability") = "",
            py::arg("asserted_at") = 0, py::arg("expires_at") = py::none(),
            py::arg("enforce_capabilities") = false)
        .def(
            "retract_fact",
            [](const pbac::PurposeGraph& g, const std::string& fact) {
                pbac::Fact f = pbac::dsl::parse_fact(fact);
                return pbac::retract_fact(g, f,
                                          make_provenance("local", "Qualify", 0, std::nullopt));
            },
            py::arg("fact"))
        .def(
            "expire",
            [](const pbac::PurposeGraph& g, std::int64_t now) {
                auto [next, expired] = pbac::expire_facts(g, now);
                std::vector<std::string> names;
                for (const auto& f : expired) names.push_back(f.to_string());
                return py::make_tuple(next, names);
            },
            py::arg("now"))
        .def("validate",
             [](const pbac::PurposeGraph& g) {
                 std::vector<std::string> out;
                 for (const auto& w : pbac::validate_graph(g).warnings)
                     out.push_back(std::string(pbac::to_string(w.code)) + ": " + w.message);
                 return out;
             })
        .def("to_text", [](const pbac::PurposeGraph& g) { return pbac::save_graph_text(g); })
        .def("to_dot", [](const pbac::PurposeGraph& g) { return pbac::to_dot(g); });

    m.def(
        "decide",
        [](const pbac::PurposeGraph& g, const std::string& actor, const std::string& action,
           const std::string& purpose, const std::string& asset) {
            return decision_to_dict(
                pbac::decide_request(g, {actor, action, purpose, asset, "py"}));
        },
        py::arg("graph"), py::arg("actor"), py::arg("action"), py::arg("purpose"),
        py::arg("asset"));

    m.def(
        "decide_ternary",
        [](const pbac::PurposeGraph& g, const std::string& actor, const std::string& action,
           const std::string& asset) {
            py::dict out = decision_to_dict(pbac::decide_ternary(g, actor, action, asset, true));
            return out;
        },
        py::arg("graph"), py::arg("actor"), py::arg("action"), py::arg("asset"));

    m.def("format_program", [](const std::string& text) {
        return pbac::dsl::format_program(pbac::dsl::parse_program(text));
    });

    m.def(
        "run_program",
        [](const std::string& text, const pbac::PurposeGraph& g, bool enforce) {
            pbac::dsl::ExecOptions opts;
            opts.enforce_capabilities = enforce;
            auto [trace, final_graph] = pbac::dsl::execute_program(
                pbac::dsl::parse_program(text), g, opts);
            std::vector<std::string> outcomes;
            for (const auto& e : trace.entries)
                outcomes.push_back(pbac::dsl::to_string(e.outcome));
            return py::make_tuple(outcomes, final_graph);
        },
        py::arg("text"), py::arg("graph") = pbac::PurposeGraph{},
        py::arg("enforce_capabilities") = false);

    m.def(
        "simulate",
        [](const std::string& archetype, const std::string& governance,
           const std::vector<std::string>& orgs,
           const std::map<std::string, std::string>& scripts, bool loopback) {
            auto a = pbac::sim::archetype_from_string(archetype);
            auto g = pbac::sim::governance_from_string(governance);
            if (!a || !g) throw pbac::Error("unknown archetype or governance mode");
            pbac::sim::Topology topo = pbac::sim::build_topology(*a, *g, orgs);
            std::map<pbac::Atom, pbac::dsl::Program> programs;
            for (const auto& [org, text] : scripts)
                programs[org] = pbac::dsl::parse_program(text);
            pbac::sim::SimOptions opts;
            opts.loopback = loopback;
            pbac::sim::SimTrace trace = pbac::sim::run_scenario(topo, programs, opts);
            py::dict out;
            out["decisions"] = trace.decision_sequence;
            out["records"] = trace.to_records();
            py::dict traces;
            for (const auto& [org, t] : trace.org_traces) {
                std::vector<std::string> outcomes;
                for (const auto& e : t.entries) outcomes.push_back(pbac::dsl::to_string(e.outcome));
                traces[py::cast(org)] = outcomes;
            }
            out["org_traces"] = traces;
            return out;
        },
        py::arg("archetype"), py::arg("governance"), py::arg("orgs"), py::arg("scripts"),
        py::arg("loopback") = false);
}
