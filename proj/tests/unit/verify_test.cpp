#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/pipeline.hpp"
#include "switchbox/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace switchbox;
using test_support::TwoMode;

namespace {

ProblemFile zero_problem() {
    TwoMode s;
    s.extra = "expected:\n  values: [0.0, 0.0]\nsymmetry:\n  mode_map: [2, 1]\n";
    return test_support::two_mode_file(s);
}

RunConfig small_config(const ProblemFile& f) {
    RunConfig c = make_run_config("verify", "zero", f.defaults);
    c.grid = {41};
    c.fd_steps = 40;
    c.mc_paths = 2000;
    c.mc_steps = 20;
    c.degree = 3;
    c.sim_paths = 10000;
    c.sim_steps = 40;
    c.oracle_levels = 100;
    return c;
}

Thresholds thresholds() { return load_thresholds(test_support::source_dir() / "config" / "thresholds.yaml"); }

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("thresholds load; a missing key is an error") {
    const Thresholds th = thresholds();
    CHECK(th.complementarity.max_abs == 5e-2);
    CHECK(th.picard.max_iterations == 20);

    std::ifstream in(test_support::source_dir() / "config" / "thresholds.yaml");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const std::string key = "  safety: 2.0";
    text.replace(text.find(key), key.size(), "");
    const auto file = std::filesystem::temp_directory_path() / "switchbox_thresholds_test.yaml";
    std::ofstream(file) << text;
    CHECK_THROWS_AS(load_thresholds(file), Error);
    std::filesystem::remove(file);
}

TEST_CASE("zero problem passes every check with nothing measured") {
    const ProblemFile f = zero_problem();
    const CompareRun run = run_compare(f, small_config(f), thresholds());
    const Report& r = run.report;
    REQUIRE(r.checks.size() == 13);
    const char* order[] = {"closed_form",  "oracle_equivalence", "picard_monotone", "complementarity_residual",
                           "obstacle_inequality", "strategy_optimality", "switch_tail", "dpp",
                           "symmetry",     "determinism",        "fd_vs_mc",        "upper_bound",
                           "continuity_probe"};
    for (std::size_t i = 0; i < 13; ++i) {
        CAPTURE(r.checks[i].name);
        CAPTURE(r.checks[i].detail);
        CHECK(r.checks[i].name == order[i]);
        CHECK(r.checks[i].status == CheckStatus::pass);
        CHECK(r.checks[i].measured == 0.0);
    }
    CHECK(r.overall_pass());
    CHECK(r.to_json() == run_compare(f, small_config(f), thresholds()).report.to_json());
}

TEST_CASE("an injected defect fails the complementarity check at its node") {
    const ProblemFile f = test_support::fixture("benchmark");
    RunConfig c = make_run_config("verify", "benchmark", f.defaults);
    c.grid = {81};
    c.fd_steps = 80;
    ValueField v = run_fd(f.problem, c);
    const ValueField fine = run_fd(f.problem, c, 2);
    v.at(0, 40, 55) += 0.1;
    VerifyInputs in;
    in.fd = &v;
    in.fd_refined = &fine;
    const Report r = cross_check(f.problem, in, thresholds());
    const Check* k = r.find("complementarity_residual");
    REQUIRE(k != nullptr);
    CHECK(k->status == CheckStatus::fail);
    CHECK(k->detail.find("node 55") != std::string::npos);
    CHECK_FALSE(r.overall_pass());
}

TEST_CASE("checks without inputs are skipped") {
    const ProblemFile f = test_support::fixture("benchmark");
    const Report r = cross_check(f.problem, VerifyInputs{}, thresholds());
    CHECK(r.checks.size() == 13);
    for (const Check& k : r.checks) {
        CAPTURE(k.name);
        CHECK(k.status == CheckStatus::skipped);
    }
    CHECK(r.to_json().find("\"measured\": null") != std::string::npos);
}

TEST_CASE("a field from another problem is refused") {
    const ProblemFile a = test_support::fixture("benchmark");
    const ProblemFile b = test_support::fixture("identical_modes");
    RunConfig c = make_run_config("verify", "benchmark", a.defaults);
    c.grid = {41};
    c.fd_steps = 40;
    const ValueField v = run_fd(a.problem, c);
    VerifyInputs in;
    in.fd = &v;
    CHECK_THROWS_AS(cross_check(b.problem, in, thresholds()), Error);
}

}
