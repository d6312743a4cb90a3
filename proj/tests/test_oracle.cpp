#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "oracle.hpp"
#include "pbac/decide.hpp"

using namespace pbac;

// A trimmed run of the oracle-agreement suite for quick feedback; the
// acceptance binary runs the full 1000-graph version.
TEST_CASE("decide_request agrees with the naive ground-instantiation oracle") {
    std::mt19937 rng(2024);
    int permits = 0, denies = 0;
    for (int i = 0; i < 150; ++i) {
        gen::Universe u = gen::random_universe(rng);
        PurposeGraph g = gen::random_graph(rng, u);
        oracle::Model m = oracle::ground_fixpoint(g);
        DerivedState st = saturate(g);

        for (const Atom& actor : m.actors())
            for (const Atom& action : m.actions)
                for (const Atom& purpose : m.purposes)
                    for (const Atom& asset : m.assets) {
                        bool expect = oracle::lawful(m, g, actor, action, purpose, asset);
                        Decision d =
                            decide_request(g, st, {actor, action, purpose, asset, "t"});
                        if (expect != d.permitted()) {
                            CAPTURE(i);
                            CAPTURE(actor);
                            CAPTURE(action);
                            CAPTURE(purpose);
                            CAPTURE(asset);
                            REQUIRE(expect == d.permitted());
                        }
                        (expect ? permits : denies)++;
                    }
    }
    CHECK(permits > 0);
    CHECK(denies > 0);
}

TEST_CASE("closure properties on random graphs") {
    std::mt19937 rng(77);
    for (int i = 0; i < 60; ++i) {
        gen::Universe u = gen::random_universe(rng);
        PurposeGraph g = gen::random_graph(rng, u);
        DerivedState st = saturate(g);

        // reflexive over the purpose sort
        for (const Atom& p : st.sorts.purposes) CHECK(st.specific_of_closure.count({p, p}));
        // transitive
        for (const auto& a : st.specific_of_closure)
            for (const auto& b : st.specific_of_closure)
                if (a.second == b.first)
                    CHECK(st.specific_of_closure.count({a.first, b.second}));
        // derived links never invent compatible-with tuples
        for (const auto& [tuple, link] : st.links)
            if (tuple.to_string().rfind("compatible-with", 0) == 0) FAIL("derived compatible-with");
    }
}

TEST_CASE("the Eq-1 variant engine agrees with EQ7 + reflexivity") {
    std::mt19937 rng(99);
    for (int i = 0; i < 80; ++i) {
        gen::Universe u = gen::random_universe(rng);
        PurposeGraph g = gen::random_graph(rng, u);
        oracle::Model m = oracle::ground_fixpoint(g);
        for (const Atom& actor : m.actors())
            for (const Atom& action : m.actions)
                for (const Atom& purpose : m.purposes)
                    for (const Atom& asset : m.assets)
                        CHECK(oracle::lawful(m, g, actor, action, purpose, asset, false) ==
                              oracle::lawful(m, g, actor, action, purpose, asset, true));
    }
}

TEST_CASE("universal premise: each required consent is load-bearing") {
    // asset with three subjects, all consents required
    PurposeGraph g;
    auto with = [](PurposeGraph graph, const Fact& f) {
        return assert_fact(graph, f, {"t", default_capability_for(f.kind), 0});
    };
    for (const Atom& s : {Atom("S1"), Atom("S2"), Atom("S3")}) {
        g = with(g, Fact::subject_of(s, "D"));
        g = with(g, Fact::consent_given(s, "C", "P"));
    }
    g = with(g, Fact::prerequisite_of("A", "P"));
    g = with(g, Fact::sufficiently_specific("P"));
    g = with(g, Fact::legal_basis_claim(LegalBasis::Consent, "C", "P"));

    Request r{"C", "A", "P", "D", "t"};
    REQUIRE(decide_request(g, r).permitted());
    for (const Atom& s : {Atom("S1"), Atom("S2"), Atom("S3")}) {
        PurposeGraph without =
            retract_fact(g, Fact::consent_given(s, "C", "P"), {"t", Capability::Consent, 0});
        CHECK(!decide_request(without, r).permitted());
    }
}

TEST_CASE("adding facts from the monotone fragment preserves permits") {
    // every kind except subject-of grows conclusions monotonically; subject-of
    // widens universal premises and may legitimately retire a permit
    std::mt19937 rng(5150);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        gen::Universe u = gen::random_universe(rng);
        PurposeGraph g = gen::random_graph(rng, u);
        oracle::Model m = oracle::ground_fixpoint(g);
        DerivedState st = saturate(g);

        std::vector<Request> permitted;
        for (const Atom& actor : m.actors())
            for (const Atom& action : m.actions)
                for (const Atom& purpose : m.purposes)
                    for (const Atom& asset : m.assets) {
                        Request r{actor, action, purpose, asset, "t"};
                        if (decide_request(g, st, r).permitted()) permitted.push_back(r);
                    }
        if (permitted.empty()) continue;

        for (int k = 0; k < 10; ++k) {
            Fact f = gen::random_fact(rng, u);
            if (f.kind == FactKind::SubjectOf) continue;
            PurposeGraph g2 = assert_fact(g, f, {"t", default_capability_for(f.kind), 0});
            DerivedState st2 = saturate(g2);
            for (const Request& r : permitted) {
                CHECK(decide_request(g2, st2, r).permitted());
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("the two possible EQ8 sufficiency gates differ exactly as expected") {
    PurposeGraph g;
    auto with = [](PurposeGraph graph, const Fact& f) {
        return assert_fact(graph, f, {"t", default_capability_for(f.kind), 0});
    };
    g = with(g, Fact::subject_of("S", "D"));
    g = with(g, Fact::prerequisite_of("A", "P"));
    g = with(g, Fact::compatible_with("P", "Q"));
    g = with(g, Fact::sufficiently_specific("Q"));
    g = with(g, Fact::legal_basis_claim(LegalBasis::LegitimateInterest, "C", "Q"));
    g = with(g, Fact::has_been_informed("S", "C", "Q"));
    g = with(g, Fact::has_been_informed("S", "C", "P"));
    oracle::Model m = oracle::ground_fixpoint(g);

    // P is not sufficiently specific: the request-purpose gate denies, the
    // anchor gate (already implied by the claim gate) permits
    CHECK(!oracle::lawful(m, g, "C", "A", "P", "D", false, oracle::Eq8Gate::RequestPurpose));
    CHECK(oracle::lawful(m, g, "C", "A", "P", "D", false, oracle::Eq8Gate::AnchorPurpose));
    // the engine gates on the requesting purpose
    CHECK(!decide_request(g, {"C", "A", "P", "D", "t"}).permitted());

    // once P is qualified, both gates coincide
    PurposeGraph g2 = with(g, Fact::sufficiently_specific("P"));
    oracle::Model m2 = oracle::ground_fixpoint(g2);
    CHECK(oracle::lawful(m2, g2, "C", "A", "P", "D", false, oracle::Eq8Gate::RequestPurpose));
    CHECK(oracle::lawful(m2, g2, "C", "A", "P", "D", false, oracle::Eq8Gate::AnchorPurpose));
    CHECK(decide_request(g2, {"C", "A", "P", "D", "t"}).permitted());
}

TEST_CASE("subject-of additions can retire a consent-based permit (non-monotone edge)") {
    PurposeGraph g;
    auto with = [](PurposeGraph graph, const Fact& f) {
        return assert_fact(graph, f, {"t", default_capability_for(f.kind), 0});
    };
    g = with(g, Fact::subject_of("S1", "D"));
    g = with(g, Fact::consent_given("S1", "C", "P"));
    g = with(g, Fact::prerequisite_of("A", "P"));
    g = with(g, Fact::sufficiently_specific("P"));
    g = with(g, Fact::legal_basis_claim(LegalBasis::Consent, "C", "P"));
    Request r{"C", "A", "P", "D", "t"};
    REQUIRE(decide_request(g, r).permitted());

    // a new subject without consent defeats the universal premise
    PurposeGraph g2 = with(g, Fact::subject_of("S2", "D"));
    CHECK(!decide_request(g2, r).permitted());
}
