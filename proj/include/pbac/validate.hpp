#pragma once

#include <string>
#include <vector>

#include "pbac/graph.hpp"

namespace pbac {

struct ValidationWarning {
    enum class Code {
        SpecificOfCycle,        // w1: closure stays well-defined, cycles are suspicious
        InactiveClaim,          // w2: claim purpose has no sufficiently-specific path
        AssetWithoutSubjects,   // w3: universal premises hold vacuously
        DanglingDpa,            // w4: dpa names an actor appearing nowhere else
    };
    Code code;
    std::string message;

    friend bool operator==(const ValidationWarning&, const ValidationWarning&) = default;
};

const char* to_string(ValidationWarning::Code c);

struct ValidationReport {
    std::vector<ValidationWarning> warnings;

    bool empty() const { return warnings.empty(); }
    bool has(ValidationWarning::Code c) const;
};

// Never fails; reports. Deterministic output order (by code, then message).
ValidationReport validate_graph(const PurposeGraph& g);

}  // namespace pbac
