#pragma once

#include <stdexcept>
#include <string>

namespace pbac {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedFact : Error {
    using Error::Error;
};

struct MalformedRequest : Error {
    using Error::Error;
};

struct CapabilityViolation : Error {
    using Error::Error;
};

struct FeatureDisabled : Error {
    using Error::Error;
};

// Parse-time errors carry a 1-based source location.
struct SyntaxError : Error {
    int line;
    int column;
    std::string expected;

    SyntaxError(int line_, int column_, const std::string& expected_, const std::string& got)
        : Error("syntax error at " + std::to_string(line_) + ":" + std::to_string(column_) +
                ": expected " + expected_ + ", got " + got),
          line(line_), column(column_), expected(expected_) {}
};

struct UnknownPredicate : Error {
    int line;
    int column;
    std::string name;

    UnknownPredicate(int line_, int column_, const std::string& name_)
        : Error("unknown predicate '" + name_ + "' at " + std::to_string(line_) + ":" +
                std::to_string(column_)),
          line(line_), column(column_), name(name_) {}
};

struct UnknownRequest : Error {
    using Error::Error;
};

struct NotPermitted : Error {
    using Error::Error;
};

struct AlreadyProcessed : Error {
    using Error::Error;
};

struct StoreUnavailable : Error {
    using Error::Error;
};

struct OrgCountMismatch : Error {
    using Error::Error;
};

struct WiringError : Error {
    using Error::Error;
};

}  // namespace pbac
