#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/problem.hpp"
#include "switchbox/problem_io.hpp"

#include <doctest.h>

#include <array>

using namespace switchbox;
using test_support::TwoMode;

TEST_SUITE("model") {

TEST_CASE("constant cost equal to the floor passes validation") {
    TwoMode s;
    s.psi1 = "1";
    s.psi2 = "1";
    s.cost12 = s.cost21 = "0.5";
    s.alpha = 0.5;
    const ValidationReport r = validate_problem(test_support::two_mode(s), 512, 3);
    CHECK(r.ok());
    CHECK(r.min_cost == 0.5);
}

TEST_CASE("a cost that decays below the floor is reported with a witness") {
    TwoMode s;
    s.cost12 = "0.5 - t";
    s.cost21 = "0.5";
    s.alpha = 0.5;
    const ValidationReport r = validate_problem(test_support::two_mode(s), 512, 3);
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const Violation& v : r.violations) {
        if (v.kind != "cost_floor") continue;
        found = true;
        CHECK(v.t > 0.0);
        CHECK(v.measured < 0.5);
        CHECK(v.bound == 0.5);
    }
    CHECK(found);
}

TEST_CASE("growth violations are reported") {
    TwoMode s;
    s.psi1 = "x1^4";
    const ValidationReport r = validate_problem(test_support::two_mode(s), 256, 1);
    bool found = false;
    for (const Violation& v : r.violations) found = found || v.kind == "growth";
    CHECK(found);
}

TEST_CASE("structural defects reject the problem") {
    const std::string one_mode =
        "name: single\ndimension: 1\nhorizon: 1.0\nmodes: 1\ndrift: [\"0\"]\nvolatility:\n  - [\"1\"]\n"
        "psi: [\"1\"]\nswitching_cost:\n  - [~]\nalpha: 0.1\nvalidation_box: {lo: [-1], hi: [1]}\nx0: [0]\n"
        "initial_mode: 1\n";
    CHECK_THROWS_AS(parse_problem_yaml(one_mode), ProblemError);

    TwoMode diag;
    diag.extra = "";
    std::string text = test_support::yaml_of(diag);
    const std::string from = "  - [~, \"0.1\"]";
    text.replace(text.find(from), from.size(), "  - [\"0.2\", \"0.1\"]");
    CHECK_THROWS_AS(parse_problem_yaml(text), ProblemError);

    TwoMode zero_alpha;
    zero_alpha.alpha = 0.0;
    CHECK_THROWS_AS(parse_problem_yaml(test_support::yaml_of(zero_alpha)), ProblemError);
}

TEST_CASE("validation with the same seed is bit-reproducible") {
    const SwitchingProblem p = test_support::fixture("gbm_power_plant").problem;
    const ValidationReport a = validate_problem(p, 1000, 11);
    const ValidationReport b = validate_problem(p, 1000, 11);
    CHECK(a.violations.size() == b.violations.size());
    CHECK(a.min_cost == b.min_cost);
    CHECK(a.implied_growth_constant == b.implied_growth_constant);
    CHECK(a.implied_diffusion_constant == b.implied_diffusion_constant);
    CHECK(a.implied_lipschitz_constant == b.implied_lipschitz_constant);
}

TEST_CASE("shipped fixtures load and validate") {
    for (const char* name : {"identical_modes", "deterministic", "benchmark", "gbm_power_plant"}) {
        CAPTURE(name);
        const ProblemFile f = test_support::fixture(name);
        CHECK_NOTHROW(f.problem.check_structure());
        CHECK(validate_problem(f.problem, 1024, 7).ok());
    }
}

TEST_CASE("the problem hash tracks solve-relevant content") {
    const ProblemFile a = test_support::fixture("benchmark");
    const ProblemFile b = test_support::fixture("benchmark");
    CHECK(problem_hash(a.problem) == problem_hash(b.problem));
    SwitchingProblem c = a.problem;
    c.psi[0] = parse_expr("x1 + 0.01");
    CHECK(problem_hash(c) != problem_hash(a.problem));
}

TEST_CASE("shorthand paths resolve to yaml files") {
    const auto p = resolve_problem_path(test_support::source_dir() / "problems" / "benchmark");
    CHECK(p.extension() == ".yaml");
    CHECK_THROWS_AS(load_problem_file(test_support::source_dir() / "problems" / "missing"), ProblemError);
}

TEST_CASE("malformed documents report a problem error") {
    CHECK_THROWS_AS(parse_problem_yaml("name: [unclosed"), ProblemError);
    TwoMode s;
    s.psi1 = "x1 +";
    CHECK_THROWS(test_support::two_mode(s));
}

TEST_CASE("2x2 eigenvalues by the closed formula") {
    const auto ev = symmetric_eigenvalues_2x2(1.0, 0.5, 1.0);
    CHECK(ev[0] == doctest::Approx(0.5));
    CHECK(ev[1] == doctest::Approx(1.5));
    const std::array<double, 4> a{1.0, 0.5, 0.5, 1.0};
    CHECK(min_symmetric_eigenvalue(a, 2) == doctest::Approx(0.5));
}

}
