#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pbac/decide.hpp"
#include "pbac/graph.hpp"

namespace pbac::dsl {

// Optional trailing provenance annotation on an assert:
//   +contract(Bob,Company,DeliverGoods) @ {by=Company,cap=Control,exp=900}.
struct ProvAnnotation {
    Atom by;
    Capability cap = Capability::Qualify;
    std::optional<std::int64_t> exp;

    friend bool operator==(const ProvAnnotation&, const ProvAnnotation&) = default;
};

struct AssertStmt {
    Fact fact;
    std::optional<ProvAnnotation> prov;
    friend bool operator==(const AssertStmt&, const AssertStmt&) = default;
};

struct RetractStmt {
    Fact fact;
    friend bool operator==(const RetractStmt&, const RetractStmt&) = default;
};

enum class TriggerName { MakeRequest, Process };

struct TriggerStmt {
    TriggerName name = TriggerName::MakeRequest;
    std::array<Atom, 4> args;  // actor, action, purpose, asset
    friend bool operator==(const TriggerStmt&, const TriggerStmt&) = default;
};

struct QueryStmt {
    std::array<Atom, 4> args;  // lawful-request(actor, action, purpose, asset)
    friend bool operator==(const QueryStmt&, const QueryStmt&) = default;
};

struct CommentStmt {
    std::string text;  // everything after "//", verbatim
    friend bool operator==(const CommentStmt&, const CommentStmt&) = default;
};

using Statement = std::variant<AssertStmt, RetractStmt, TriggerStmt, QueryStmt, CommentStmt>;

struct Program {
    std::vector<Statement> statements;
    friend bool operator==(const Program&, const Program&) = default;
};

// Throws SyntaxError / UnknownPredicate. Whitespace-insensitive; statements
// end with '.'; "//" starts a line comment.
Program parse_program(const std::string& text);

// Canonical printer: one statement per line, no space after commas.
// parse(format(p)) == p and format is idempotent.
std::string format_program(const Program& p);
std::string format_statement(const Statement& s);

// Parses a bare fact term such as "subject-of(Alice,AlicesRecords)".
Fact parse_fact(const std::string& text);

enum class Outcome { Ok, Violation, QuerySuccess, QueryFailure };

const char* to_string(Outcome o);

struct TraceEntry {
    Outcome outcome;
    std::string statement;  // canonical form, without trailing newline
    std::string detail;     // e.g. the capability violation message
};

// One entry per executable statement; comments do not trace.
struct Trace {
    std::vector<TraceEntry> entries;
    std::uint64_t final_graph_version = 0;

    std::vector<Outcome> outcomes() const;
    bool clean() const;  // no Violation and no QueryFailure
};

struct ExecOptions {
    bool enforce_capabilities = false;
    Atom default_by = "local";
    std::function<std::int64_t()> clock = [] { return std::int64_t{0}; };
};

// Sequential, deterministic execution. Asserts/retracts mutate the working
// graph; make-request records the request; a query needs a prior matching
// make-request and then evaluates lawful-request; process is Ok only when a
// matching request exists and is lawful. Never throws on outcomes: capability
// violations under enforcement become Violation entries.
std::pair<Trace, PurposeGraph> execute_program(const Program& p, PurposeGraph g,
                                               const ExecOptions& opts = {});

Provenance provenance_for(const AssertStmt& stmt, const ExecOptions& opts);

}  // namespace pbac::dsl
