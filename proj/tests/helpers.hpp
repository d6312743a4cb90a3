#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pbac/graph_io.hpp"

#ifndef PBAC_FIXTURES_DIR
#define PBAC_FIXTURES_DIR "fixtures"
#endif

namespace helpers {

inline std::string fixture_path(const std::string& name) {
    return std::string(PBAC_FIXTURES_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline pbac::PurposeGraph fig5() { return pbac::load_graph_file(fixture_path("fig5.graph")); }

inline pbac::PurposeGraph fig5_no_cw() {
    return pbac::load_graph_file(fixture_path("fig5_no_cw.graph"));
}

}  // namespace helpers
