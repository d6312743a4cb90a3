#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "pbac/engine.hpp"

#ifndef PBAC_CLI_PATH
#define PBAC_CLI_PATH "./pbac"
#endif

namespace {

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    namespace fs = std::filesystem;
    fs::path out = fs::temp_directory_path() /
                   ("pbac_cli_" + std::to_string(::getpid()) + ".out");
    std::string cmd = std::string(PBAC_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::ostringstream buf;
    buf << in.rdbuf();
    fs::remove(out);
    return {WEXITSTATUS(status), buf.str()};
}

std::string fx(const std::string& name) { return helpers::fixture_path(name); }

}  // namespace

TEST_CASE("check: scenario (a) succeeds with exit 0") {
    CliResult r = run_cli("check " + fx("scenario_a.plg") + " --graph " + fx("fig5.graph"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("query succeeds") != std::string::npos);
    CHECK(r.output.find("no violation") != std::string::npos);
}

TEST_CASE("check: scenario (b) reports the violation with exit 1") {
    CliResult r = run_cli("check " + fx("scenario_b.plg") + " --graph " + fx("fig5_no_cw.graph"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("query fails") != std::string::npos);
    CHECK(r.output.find("violation") != std::string::npos);
}

TEST_CASE("check: structured output is json lines") {
    CliResult r = run_cli("--format structured check " + fx("scenario_a.plg") + " --graph " +
                          fx("fig5.graph"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("{\"statement\"") != std::string::npos);
    CHECK(r.output.find("\"outcome\":\"query succeeds\"") != std::string::npos);
}

TEST_CASE("graph dot: fig-5 drawing conventions") {
    CliResult r = run_cli("graph dot " + fx("fig5.graph"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("digraph") != std::string::npos);
    CHECK(r.output.find("shape=ellipse,style=filled") != std::string::npos);  // purposes
    CHECK(r.output.find("style=dotted") != std::string::npos);                // actions
    CHECK(r.output.find("style=dashed") != std::string::npos);                // assets
    CHECK(r.output.find("label=\"po\"") != std::string::npos);
    CHECK(r.output.find("(ss)") != std::string::npos);
}

TEST_CASE("graph validate") {
    CliResult clean = run_cli("graph validate " + fx("fig5.graph"));
    CHECK(clean.exit_code == 0);
    CHECK(clean.output.find("no warnings") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("check").exit_code == 2);               // missing file argument
    CHECK(run_cli("check /no/such/file.plg").exit_code == 2);
    CHECK(run_cli("graph dot /no/such.graph").exit_code == 2);
}

TEST_CASE("simulate: distributed fixture run") {
    CliResult r = run_cli("simulate --config " + fx("sim/distributed/topology.cfg") +
                          " --scripts " + fx("sim/distributed"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("permit lawful-request(Company,PrintInvoice,DeliverGoods,BobsRecords)") !=
          std::string::npos);
}

TEST_CASE("audit: report and subject views over a store written by the service path") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pbac_cli_audit";
    fs::remove_all(dir);

    // produce a store through the engine (same code path the service uses)
    {
        pbac::EngineOptions opts;
        opts.rule_set_version = "cli-test";
        opts.enforce_capabilities = false;
        opts.clock = [] { return std::int64_t{123}; };
        opts.log_path = dir / "log.jsonl";
        pbac::PdpEngine engine(opts, helpers::fig5());
        engine.handle_decision({"Company", "PrintInvoice", "DeliverGoods", "BobsRecords", "a1"});
        engine.handle_processed("a1");
    }

    CliResult report = run_cli("audit report --store " + (dir).string() + " --verify-replay");
    CHECK(report.exit_code == 0);
    CHECK(report.output.find("\"rule_set_version\": \"cli-test\"") != std::string::npos);
    CHECK(report.output.find("replay ok") != std::string::npos);

    CliResult bob = run_cli("audit subject Bob --store " + (dir / "log.jsonl").string());
    CHECK(bob.exit_code == 0);
    CHECK(bob.output.find("\"basis\": \"contract\"") != std::string::npos);
    CHECK(bob.output.find("\"processed\": true") != std::string::npos);

    CliResult alice = run_cli("audit subject Alice --store " + dir.string());
    CHECK(alice.output.find("\"entries\": []") != std::string::npos);
    fs::remove_all(dir);
}
