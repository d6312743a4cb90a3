#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <vector>

#include "pbac/fact.hpp"

namespace pbac {

// The case-specific input to reasoning: a set of qualification facts with
// provenance, plus a version counter bumped on every mutation. Values are
// immutable snapshots; mutators return fresh graphs.
class PurposeGraph {
public:
    PurposeGraph() = default;

    // Reconstructs a snapshot at a known version (replay, snapshot restore).
    static PurposeGraph from_parts(std::map<Fact, Provenance> facts, std::uint64_t version);

    bool contains(const Fact& f) const { return facts_.count(f) != 0; }
    const Provenance* provenance_of(const Fact& f) const;
    std::size_t size() const { return facts_.size(); }
    std::uint64_t version() const { return version_; }

    const std::map<Fact, Provenance>& facts() const { return facts_; }

    friend PurposeGraph assert_fact(const PurposeGraph&, const Fact&, const Provenance&, bool);
    friend PurposeGraph retract_fact(const PurposeGraph&, const Fact&, const Provenance&, bool);
    friend std::pair<PurposeGraph, std::vector<Fact>> expire_facts(const PurposeGraph&,
                                                                   std::int64_t);

private:
    std::map<Fact, Provenance> facts_;
    std::uint64_t version_ = 0;
};

// Inserts the fact; re-asserting replaces provenance. Version bumps on every
// call. Throws MalformedFact / CapabilityViolation (when enforced).
PurposeGraph assert_fact(const PurposeGraph& g, const Fact& f, const Provenance& prov,
                         bool enforce_capabilities = false);

// Removes the fact if present; a no-op (same version) otherwise.
PurposeGraph retract_fact(const PurposeGraph& g, const Fact& f, const Provenance& prov,
                          bool enforce_capabilities = false);

// Removes every fact with expires_at <= now. The boundary is inclusive:
// a fact expiring exactly now is already gone.
std::pair<PurposeGraph, std::vector<Fact>> expire_facts(const PurposeGraph& g, std::int64_t now);

// Sorts implied by the facts of a graph. Declarations are accepted but not
// required: an atom in a relation position is a member of that sort.
struct Sorts {
    std::set<Atom> purposes;
    std::set<Atom> actions;
    std::set<Atom> assets;
    std::set<Atom> subjects;
    std::set<Atom> controllers;
    std::set<Atom> processors;
    std::set<Atom> authorities;

    std::set<Atom> actors() const;  // controllers + processors; subjects are not actors
};

Sorts derive_sorts(const PurposeGraph& g);

// Subjects S with subject-of(S, d) asserted, in atom order.
std::vector<Atom> subjects_of_asset(const PurposeGraph& g, const Atom& d);

struct MutationEvent {
    enum class Kind { Assert, Retract, Expire };
    Kind kind;
    Fact fact;
    Provenance provenance;           // as supplied (Expire keeps the stored provenance)
    std::uint64_t version_after = 0;
    std::int64_t at = 0;
};

const char* to_string(MutationEvent::Kind k);

// Single-writer / many-reader holder of the latest snapshot. Mutators are
// serialized; readers take a shared_ptr and never block writers.
class GraphStore {
public:
    explicit GraphStore(PurposeGraph initial = {});

    std::shared_ptr<const PurposeGraph> snapshot() const;
    std::uint64_t version() const;

    MutationEvent apply_assert(const Fact& f, const Provenance& prov, bool enforce,
                               std::int64_t at);
    // Returns nullopt if the fact was absent (no version change, nothing recorded).
    std::optional<MutationEvent> apply_retract(const Fact& f, const Provenance& prov, bool enforce,
                                               std::int64_t at);
    // One event per expired fact, all sharing the post-sweep version.
    std::vector<MutationEvent> sweep_expired(std::int64_t now);

    // Full mutation history, in application order (includes retractions, for audit).
    std::vector<MutationEvent> history() const;

private:
    mutable std::mutex mu_;
    std::shared_ptr<const PurposeGraph> latest_;
    std::vector<MutationEvent> history_;
};

}  // namespace pbac
