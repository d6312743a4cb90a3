#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pbac/decide.hpp"
#include "pbac/graph.hpp"

namespace pbac {

struct DecisionRecord {
    Request request;
    Decision decision;
    std::uint64_t graph_version = 0;
    std::optional<std::int64_t> processed_at;  // Permit only, set once
    std::string rule_set_version;
    bool ternary = false;                  // decided through the ternary variant
    std::optional<std::string> pip_veto;   // reason, when a PIP hook vetoed a permit
};

// Turns a permit into the deny a PIP veto leaves behind.
Decision apply_pip_veto(Decision d, const std::string& reason);

// Append-only log of mutations, decisions and processed notices. Optionally
// mirrored to a line-delimited file; a record is flushed to disk before the
// caller regains control, so a response never outruns its persistence.
class DecisionLog {
public:
    DecisionLog() = default;  // memory-only
    // Opens for appending; existing content is loaded first, so a restarted
    // service resumes its history instead of restarting version numbering.
    explicit DecisionLog(const std::filesystem::path& log_path);

    DecisionLog(DecisionLog&& other) noexcept
        : mutations_(std::move(other.mutations_)),
          decisions_(std::move(other.decisions_)),
          by_request_id_(std::move(other.by_request_id_)),
          file_(std::move(other.file_)) {}

    void append_mutation(const MutationEvent& ev);
    void append_decision(const DecisionRecord& rec);
    // Throws UnknownRequest / NotPermitted / AlreadyProcessed.
    std::int64_t mark_processed(const std::string& request_id, std::int64_t at);

    const std::vector<MutationEvent>& mutations() const { return mutations_; }
    const std::vector<DecisionRecord>& decisions() const { return decisions_; }
    const DecisionRecord* find(const std::string& request_id) const;

    // Rebuilds a log (and the graph history it implies) from a log file.
    static DecisionLog load(const std::filesystem::path& log_path);

private:
    void write_line(const std::string& line);

    mutable std::mutex mu_;
    std::vector<MutationEvent> mutations_;
    std::vector<DecisionRecord> decisions_;
    std::map<std::string, std::size_t> by_request_id_;
    std::ofstream file_;
};

struct AuditReport {
    std::string rule_set_version;
    std::vector<MutationEvent> mutations;
    std::vector<DecisionRecord> decisions;
};

struct SubjectReport {
    Atom subject;
    struct Entry {
        Atom asset;
        Atom action;
        Atom purpose;
        LegalBasis basis = LegalBasis::Consent;
        Atom controller;
        std::int64_t decided_at = 0;
        bool processed = false;

        friend bool operator==(const Entry&, const Entry&) = default;
    };
    std::vector<Entry> entries;
};

AuditReport generate_audit_report(const DecisionLog& log, const std::string& rule_set_version);

// Permit records whose asset had subject-of(subject, asset) at the record's
// graph version; basis and controller are read off the recorded proof.
SubjectReport generate_subject_report(const AuditReport& report, const Atom& subject);

// Graph state reached after applying the mutation prefix up to `version`.
PurposeGraph graph_at_version(const std::vector<MutationEvent>& mutations, std::uint64_t version);

struct ReplayResult {
    bool ok = true;
    std::size_t decisions_checked = 0;
    std::string detail;  // first mismatch, if any
};

// Re-derives every recorded decision from the mutation history and compares
// the canonical serializations byte for byte.
ReplayResult replay_audit_report(const AuditReport& report);

// Canonical JSON serializations (stable key order, bit-exact for equal values).
std::string serialize_decision(const Decision& d);
std::string serialize_decision_record(const DecisionRecord& r);
std::string serialize_audit_report(const AuditReport& r);
std::string serialize_subject_report(const SubjectReport& r);
AuditReport parse_audit_report(const std::string& json_text);

// Tree/diagnosis JSON used inside the records.
std::string serialize_tree(const DerivationTree& t);
std::string serialize_diagnosis(const Diagnosis& d);

}  // namespace pbac
