#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/tree_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace switchbox;
using test_support::TwoMode;

TEST_SUITE("tree_oracle") {

TEST_CASE("Brownian lattice uses 1/6, 2/3, 1/6") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const ChainApprox c = build_chain(p, 50);
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        const double* q = c.probs(0, n);
        CHECK(q[0] == doctest::Approx(1.0 / 6.0));
        CHECK(q[1] == doctest::Approx(2.0 / 3.0));
        CHECK(q[2] == doctest::Approx(1.0 / 6.0));
    }
}

TEST_CASE("infeasible moment matching names the node") {
    TwoMode s;
    s.drift = "100";
    const SwitchingProblem p = test_support::two_mode(s);
    try {
        build_chain(p, 10);
        FAIL("expected a SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("GBM lattice matches the local mean and variance at every node") {
    const SwitchingProblem p = test_support::fixture("gbm_power_plant").problem;
    const ChainApprox c = build_chain(p, 200);
    const std::size_t rows = c.time_dependent ? c.n_levels : 1;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            const double* q = c.probs(r, n);
            const double x = c.x(n);
            const std::vector<double> xv{x};
            const double b = p.diffusion.drift[0].eval(c.time(r), xv);
            const double sig = p.diffusion.volatility[0].eval(c.time(r), xv);
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) {
                CHECK(q[k] >= 0.0);
                CHECK(q[k] <= 1.0);
                sum += q[k];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            const double mean = (q[2] - q[0]) * c.dx;
            const double second = (q[2] + q[0]) * c.dx * c.dx;
            CHECK(mean == doctest::Approx(b * c.dt).epsilon(1e-10));
            CHECK(second == doctest::Approx(sig * sig * c.dt + b * b * c.dt * c.dt).epsilon(1e-10));
        }
    }
}

TEST_CASE("closed-form roots are exact") {
    SUBCASE("zero") {
        const SwitchingProblem p = test_support::two_mode(TwoMode{});
        const ChainApprox c = build_chain(p, 100);
        for (double v : root_values(solve_dp(c, p), c)) CHECK(v == 0.0);
    }
    SUBCASE("identical modes") {
        const SwitchingProblem p = test_support::fixture("identical_modes").problem;
        const ChainApprox c = build_chain(p, 100);
        for (double v : root_values(solve_dp(c, p), c)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("deterministic") {
        const SwitchingProblem p = test_support::fixture("deterministic").problem;
        const ChainApprox c = build_chain(p, 100);
        const OracleValue w = solve_dp(c, p);
        const auto r = root_values(w, c);
        CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r[1] == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(w.action[w.index(1, 0, c.root())] == 0);
        CHECK(w.action[w.index(0, 0, c.root())] == kContinueAction);
    }
}

TEST_CASE("benchmark lattice: terminal level, obstacle, golden value, level doubling") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const GoldenRecord g = read_golden(test_support::source_dir() / "tests" / "golden" / "benchmark_oracle.txt");
    CHECK(g.problem_hash == problem_hash(p));
    const ChainApprox c = build_chain(p, g.n_levels);
    const OracleValue w = solve_dp(c, p);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t n = 0; n < c.node_count(); ++n) CHECK(w.value(i, c.n_levels, n) == 0.0);
    }
    double worst = -1.0;
    for (std::size_t l = 0; l <= c.n_levels; l += 50) {
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            worst = std::max(worst, -0.1 + w.value(1, l, n) - w.value(0, l, n));
            worst = std::max(worst, -0.1 + w.value(0, l, n) - w.value(1, l, n));
        }
    }
    CHECK(worst <= 1e-12);
    const auto root = root_values(w, c);
    CHECK(std::fabs(root[0] - g.root[0]) <= 1e-6);
    CHECK(std::fabs(root[1] - g.root[1]) <= 1e-6);
    CHECK(w.max_switch_passes <= 1);

    const ChainApprox c2 = build_chain(p, 2 * g.n_levels);
    const auto root2 = root_values(solve_dp(c2, p), c2);
    CHECK(std::fabs(root2[0] - root[0]) < 5e-4);
}

TEST_CASE("two-dimensional states are refused") {
    TwoMode s;
    const std::string yaml = R"(name: planar
dimension: 2
horizon: 1.0
modes: 2
drift: ["0", "0"]
volatility:
  - ["1", "0"]
  - ["0", "1"]
psi: ["x1", "x2"]
switching_cost:
  - [~, "0.1"]
  - ["0.1", ~]
alpha: 0.1
validation_box: {lo: [-1, -1], hi: [1, 1]}
x0: [0, 0]
initial_mode: 1
)";
    const SwitchingProblem p = parse_problem_yaml(yaml).problem;
    CHECK_THROWS_AS(build_chain(p, 10), SolverError);
}

TEST_CASE("same-level switching settles within m - 1 passes") {
    const std::string yaml = R"(name: three
dimension: 1
horizon: 1.0
modes: 3
drift: ["0"]
volatility:
  - ["1"]
psi: ["x1", "0", "0 - x1"]
switching_cost:
  - [~, "0.1", "0.1"]
  - ["0.1", ~, "0.1"]
  - ["0.1", "0.1", ~]
alpha: 0.1
validation_box: {lo: [-5], hi: [5]}
x0: [0]
initial_mode: 2
)";
    const SwitchingProblem p = parse_problem_yaml(yaml).problem;
    const ChainApprox c = build_chain(p, 200);
    const OracleValue w = solve_dp(c, p);
    CHECK(w.max_switch_passes <= 2);
}

}
