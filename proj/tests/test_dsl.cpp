#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "helpers.hpp"
#include "pbac/dsl.hpp"

using namespace pbac;
using namespace pbac::dsl;

TEST_CASE("parsing every statement form") {
    Program p = parse_program("+asset(AlicesRecords). +subject-of(Alice, AlicesRecords).");
    REQUIRE(p.statements.size() == 2);
    CHECK(std::get<AssertStmt>(p.statements[0]).fact == Fact::asset("AlicesRecords"));
    CHECK(std::get<AssertStmt>(p.statements[1]).fact ==
          Fact::subject_of("Alice", "AlicesRecords"));

    Program q = parse_program(
        "make-request(Company,PrintInvoice,DeliverGoods,BobsRecords).\n"
        "?lawful-request(Company,PrintInvoice,DeliverGoods,BobsRecords).\n"
        "process(Company,PrintInvoice,DeliverGoods,BobsRecords). //no violation\n"
        "-consent-given(Bob,Company,Marketing).");
    REQUIRE(q.statements.size() == 5);
    CHECK(std::get<TriggerStmt>(q.statements[0]).name == TriggerName::MakeRequest);
    CHECK(std::get<QueryStmt>(q.statements[1]).args[1] == "PrintInvoice");
    CHECK(std::get<TriggerStmt>(q.statements[2]).name == TriggerName::Process);
    CHECK(std::get<CommentStmt>(q.statements[3]).text == "no violation");
    CHECK(std::get<RetractStmt>(q.statements[4]).fact ==
          Fact::consent_given("Bob", "Company", "Marketing"));
}

TEST_CASE("empty input parses to the empty program") {
    CHECK(parse_program("").statements.empty());
    CHECK(parse_program("  \n\t ").statements.empty());
}

TEST_CASE("provenance annotations") {
    Program p = parse_program(
        "+contract(Bob,Company,DeliverGoods) @ {by=Company,cap=Control,exp=900}.\n"
        "+asset(D) @ { by = Collector1 , cap = Collect }.");
    const auto& a0 = std::get<AssertStmt>(p.statements[0]);
    REQUIRE(a0.prov.has_value());
    CHECK(a0.prov->by == "Company");
    CHECK(a0.prov->cap == Capability::Control);
    CHECK(a0.prov->exp == 900);
    const auto& a1 = std::get<AssertStmt>(p.statements[1]);
    REQUIRE(a1.prov.has_value());
    CHECK(!a1.prov->exp.has_value());
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_program("+asset(A).\n+subject-of(Alice AlicesRecords).");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 2);
        CHECK(e.column > 1);
        CHECK(std::string(e.what()).find("expected") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_program("+asset(A)"), SyntaxError);       // missing dot
    CHECK_THROWS_AS(parse_program("+asset().'"), SyntaxError);      // empty args
    CHECK_THROWS_AS(parse_program("+asset(A,B)."), SyntaxError);    // arity
    CHECK_THROWS_AS(parse_program("?lawful-request(a,b,c)."), SyntaxError);
    CHECK_THROWS_AS(parse_program("make-request(a,b,c,d,e)."), SyntaxError);
}

TEST_CASE("unknown predicates are parse errors with a location") {
    try {
        parse_program("+frobnicate(a,b).");
        FAIL("expected UnknownPredicate");
    } catch (const UnknownPredicate& e) {
        CHECK(e.name == "frobnicate");
        CHECK(e.line == 1);
    }
    CHECK_THROWS_AS(parse_program("launch(a,b,c,d)."), UnknownPredicate);
    CHECK_THROWS_AS(parse_program("?is-lawful(a,b,c,d)."), UnknownPredicate);
}

TEST_CASE("canonical formatting") {
    CHECK(format_program(parse_program("+asset( X ).")) == "+asset(X).\n");
    CHECK(format_program(parse_program("+subject-of(Alice, AlicesRecords).")) ==
          "+subject-of(Alice,AlicesRecords).\n");
    std::string canon = format_program(parse_program(
        "+contract(Bob,Company,DeliverGoods)@{by=Company,cap=Control,exp=900}."));
    CHECK(canon == "+contract(Bob,Company,DeliverGoods) @ {by=Company,cap=Control,exp=900}.\n");
}

TEST_CASE("parse-format round trip over random programs") {
    std::mt19937 rng(42);
    for (int i = 0; i < 500; ++i) {
        Program p = gen::random_program(rng);
        std::string once = format_program(p);
        Program reparsed = parse_program(once);
        CHECK(reparsed == p);
        CHECK(format_program(reparsed) == once);  // idempotent
    }
}

TEST_CASE("scenario scripts format to their golden files") {
    for (const char* name : {"scenario_a.plg", "scenario_b.plg", "scenario_c.plg"}) {
        CAPTURE(name);
        std::string source = helpers::read_fixture(name);
        std::string formatted = format_program(parse_program(source));
        std::string golden = helpers::read_fixture(std::string("golden/") + name);
        CHECK(formatted == golden);
    }
}

TEST_CASE("executing scenario (a): trace matches the inline comments") {
    auto [trace, g] = execute_program(parse_program(helpers::read_fixture("scenario_a.plg")),
                                      helpers::fig5());
    CHECK(trace.outcomes() ==
          std::vector<Outcome>{Outcome::Ok, Outcome::QuerySuccess, Outcome::Ok});
    CHECK(trace.clean());
}

TEST_CASE("executing scenario (b): violation without the compatibility edge") {
    auto [trace, g] = execute_program(parse_program(helpers::read_fixture("scenario_b.plg")),
                                      helpers::fig5_no_cw());
    CHECK(trace.outcomes() ==
          std::vector<Outcome>{Outcome::Ok, Outcome::QueryFailure, Outcome::Violation});

    auto [trace2, g2] = execute_program(parse_program(helpers::read_fixture("scenario_b.plg")),
                                        helpers::fig5());
    CHECK(trace2.outcomes() ==
          std::vector<Outcome>{Outcome::Ok, Outcome::QuerySuccess, Outcome::Ok});
}

TEST_CASE("executing scenario (c): both consent routes") {
    auto [trace, g] = execute_program(parse_program(helpers::read_fixture("scenario_c.plg")),
                                      helpers::fig5_no_cw());
    CHECK(trace.outcomes() ==
          std::vector<Outcome>{Outcome::Ok, Outcome::Ok, Outcome::Ok, Outcome::QueryFailure,
                               Outcome::Ok, Outcome::QuerySuccess});

    auto [trace2, g2] = execute_program(parse_program(helpers::read_fixture("scenario_c_alt.plg")),
                                        helpers::fig5_no_cw());
    CHECK(trace2.outcomes() ==
          std::vector<Outcome>{Outcome::Ok, Outcome::Ok, Outcome::QueryFailure, Outcome::Ok,
                               Outcome::QuerySuccess, Outcome::Ok});
}

TEST_CASE("a query without a preceding make-request fails") {
    auto [trace, g] = execute_program(
        parse_program("?lawful-request(Company,PrintInvoice,DeliverGoods,BobsRecords)."),
        helpers::fig5());
    CHECK(trace.outcomes() == std::vector<Outcome>{Outcome::QueryFailure});
}

TEST_CASE("consent withdrawal flips the scenario-(c) process to a violation") {
    std::string script = helpers::read_fixture("scenario_c_alt.plg") +
                         "-consent-given(Bob,Company,MakePersonalOffer).\n"
                         "process(Company,PrintOffer,MakePersonalOffer,BobsRecords).\n";
    auto [trace, g] = execute_program(parse_program(script), helpers::fig5_no_cw());
    std::vector<Outcome> out = trace.outcomes();
    REQUIRE(out.size() == 8);
    CHECK(out[5] == Outcome::Ok);         // process while consent holds
    CHECK(out[6] == Outcome::Ok);         // the retraction itself
    CHECK(out[7] == Outcome::Violation);  // processing after withdrawal
}

TEST_CASE("capability enforcement turns bad asserts into trace violations") {
    ExecOptions opts;
    opts.enforce_capabilities = true;
    auto [trace, g] = execute_program(
        parse_program("+consent-given(Bob,Company,Marketing) @ {by=Company,cap=Qualify}.\n"
                      "+asset(D) @ {by=Collector1,cap=Collect}.\n"),
        {}, opts);
    REQUIRE(trace.entries.size() == 2);
    CHECK(trace.entries[0].outcome == Outcome::Violation);
    CHECK(trace.entries[1].outcome == Outcome::Ok);
    CHECK(g.contains(Fact::asset("D")));
    CHECK(!g.contains(Fact::consent_given("Bob", "Company", "Marketing")));
}

TEST_CASE("execution equals core-model operations plus decide (no hidden state)") {
    std::string script =
        "+prerequisite-of(A,P). +sufficiently-specific(P).\n"
        "+legal-basis-legitimate-interest(C,P).\n"
        "make-request(C,A,P,D).\n"
        "?lawful-request(C,A,P,D).\n";
    auto [trace, g] = execute_program(parse_program(script), {});
    PurposeGraph manual;
    for (const Fact& f :
         {Fact::prerequisite_of("A", "P"), Fact::sufficiently_specific("P"),
          Fact::legal_basis_claim(LegalBasis::LegitimateInterest, "C", "P")})
        manual = assert_fact(manual, f, {"local", default_capability_for(f.kind), 0});
    CHECK(g.facts() == manual.facts());
    CHECK(trace.entries.back().outcome ==
          (decide_request(manual, {"C", "A", "P", "D", "x"}).permitted()
               ? Outcome::QuerySuccess
               : Outcome::QueryFailure));
}
