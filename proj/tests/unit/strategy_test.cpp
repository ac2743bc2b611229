#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/fd_solver.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/strategy.hpp"
#include "switchbox/tree_oracle.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace switchbox;
using test_support::TwoMode;

namespace {

ValueField fd(const SwitchingProblem& p, std::size_t nx, std::size_t nt) {
    const std::array<std::size_t, 1> n{nx};
    return solve_fd(p, make_grid(p, n, nt));
}

}  // namespace

TEST_SUITE("strategy") {

TEST_CASE("identical modes: never switch") {
    const SwitchingProblem p = test_support::fixture("identical_modes").problem;
    const ValueField v = fd(p, 101, 100);
    const PolicyField pol = extract_policy(v, p);
    for (int a : pol.action) CHECK(a == kContinueAction);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 2000, 100, 3);
    const StrategyRun r = simulate_strategy(pol, e, p);
    CHECK(r.summary.total_switches == 0);
    CHECK(r.summary.mean_profit == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deterministic: one switch at time zero") {
    const SwitchingProblem p = test_support::fixture("deterministic").problem;
    const ValueField v = fd(p, 101, 100);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 10, 100, 3);
    const StrategyRun r = simulate_strategy(extract_policy(v, p), e, p);
    for (const StrategyTrace& t : r.traces) {
        REQUIRE(t.switches.size() == 1);
        CHECK(t.switches[0].tau == 0.0);
        CHECK(t.switches[0].from == 1);
        CHECK(t.switches[0].to == 0);
        CHECK(t.profit == doctest::Approx(0.9).epsilon(1e-12));
    }
    CHECK(accounting_mismatches(r, e, p) == 0);
}

TEST_CASE("benchmark switching boundary") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const ValueField v = fd(p, 201, 400);
    const PolicyField pol = extract_policy(v, p);
    const auto b_fd = switching_boundary(pol, 0);
    const ChainApprox c = build_chain(p, 400);
    const OracleValue w = solve_dp(c, p);
    const auto b_or = switching_boundary(w, c, 0);
    REQUIRE(b_fd.size() == 401);
    REQUIRE(b_or.size() == 401);
    // mode 1 earns x, so it leaves below a negative level that drops as time runs out
    for (std::size_t l = 0; l <= 300; l += 50) {
        CAPTURE(l);
        CHECK(b_fd[l] < 0.0);
        CHECK(std::fabs(b_fd[l] - b_or[l]) <= 0.15);
    }
    CHECK(b_fd[300] < b_fd[0]);
}

TEST_CASE("benchmark simulation: accounting, churn, random strategies, dpp") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const ValueField v = fd(p, 201, 400);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 10000, 400, 8);
    const StrategyRun r = simulate_strategy(extract_policy(v, p), e, p);
    CHECK(accounting_mismatches(r, e, p) == 0);
    CHECK(r.summary.churn == 0);
    CHECK(r.summary.truncated <= r.summary.n_paths / 20);
    const double v0 = v.interpolate(0, 0.0, p.x0);
    CHECK(std::fabs(r.summary.mean_profit - v0) <= 2.0 * r.summary.standard_error + 1e-2);

    const RandomStrategyReport rs = random_strategy_check(r, e, p, 50, 2000, 99);
    CHECK(rs.strategies == 50);
    CHECK(rs.beaten_by == 0);

    const TailReport tail = switch_statistics(r.traces);
    CHECK(tail.n_traces == 10000);
    CHECK(tail.bounded);

    for (std::size_t n : {1u, 3u}) {
        const DppReport d = check_dpp(v, p, simulate(p, 0.0, p.x0, 5000, 400, 21), n);
        CHECK(std::fabs(d.lhs - d.rhs) <= 2.0 * d.standard_error + 1e-2);
    }
}

TEST_CASE("the tail table needs enough traces") {
    std::vector<StrategyTrace> few(10);
    CHECK_THROWS_AS(switch_statistics(few), std::invalid_argument);
}

TEST_CASE("prohibitive costs: nobody switches") {
    TwoMode s;
    s.psi1 = "x1";
    s.psi2 = "0 - x1";
    s.cost12 = s.cost21 = "10";
    const SwitchingProblem p = test_support::two_mode(s);
    const ValueField v = fd(p, 101, 100);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 10000, 100, 5);
    const StrategyRun r = simulate_strategy(extract_policy(v, p), e, p);
    CHECK(r.summary.total_switches == 0);
    const TailReport tail = switch_statistics(r.traces);
    CHECK(tail.rows.empty());
    CHECK(tail.fitted_constant == 0.0);
}

TEST_CASE("dpp on closed-form problems") {
    SUBCASE("identical") {
        const SwitchingProblem p = test_support::fixture("identical_modes").problem;
        const ValueField v = fd(p, 101, 100);
        const DppReport d = check_dpp(v, p, simulate(p, 0.0, p.x0, 2000, 100, 4), 1);
        CHECK(std::fabs(d.lhs - d.rhs) <= 2.0 * d.standard_error + 1e-2);
        CHECK(d.reached == 0.0);
    }
    SUBCASE("zero") {
        const SwitchingProblem p = test_support::two_mode(TwoMode{});
        const ValueField v = fd(p, 101, 100);
        const DppReport d = check_dpp(v, p, simulate(p, 0.0, p.x0, 500, 100, 4), 3);
        CHECK(d.lhs == 0.0);
        CHECK(d.rhs == 0.0);
    }
}

TEST_CASE("leaving the grid box too often is an error") {
    TwoMode s;
    s.psi1 = "x1";
    s.lo = -0.3;
    s.hi = 0.3;
    const SwitchingProblem p = test_support::two_mode(s);
    const ValueField v = fd(p, 21, 100);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 1000, 100, 4);
    CHECK_THROWS_AS(simulate_strategy(extract_policy(v, p), e, p), SolverError);
}

}
