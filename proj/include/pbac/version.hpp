#pragma once

namespace pbac {

// The case-generic rule set is compiled into the engine; this string names
// the rule-set revision recorded with every decision.
inline constexpr const char* kRuleSetVersion = "pbac-rules/1";

inline constexpr const char* kProjectVersion = "0.1.0";

}  // namespace pbac
