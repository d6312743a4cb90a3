#pragma once

#include <string>

#include "pbac/graph.hpp"

namespace pbac {

// Graph files hold one fact per line in DSL assert syntax, optionally with a
// trailing provenance annotation. Comments and blank lines are allowed.
PurposeGraph load_graph_text(const std::string& text, const Atom& default_by = "local");
PurposeGraph load_graph_file(const std::string& path, const Atom& default_by = "local");

// Canonical export (facts in value order); load(save(g)) has the same facts.
std::string save_graph_text(const PurposeGraph& g);

// DOT export: purposes are filled ellipses, actions dotted, assets dashed;
// relation edges use the po/so/cw abbreviations and sufficiently-specific
// purposes carry an "(ss)" mark.
std::string to_dot(const PurposeGraph& g);

}  // namespace pbac
