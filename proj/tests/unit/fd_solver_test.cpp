#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/fd_solver.hpp"
#include "switchbox/tree_oracle.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>

using namespace switchbox;
using test_support::TwoMode;

namespace {

Grid grid1(const SwitchingProblem& p, std::size_t nx, std::size_t nt) {
    const std::array<std::size_t, 1> n{nx};
    return make_grid(p, n, nt);
}

double at_x0(const ValueField& v, const SwitchingProblem& p, std::size_t mode) {
    return v.interpolate(mode, 0.0, p.x0);
}

double max_abs_diff(const ValueField& a, const ValueField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.modes(); ++i) {
        for (std::size_t n = 0; n <= a.grid().n_time; ++n) {
            for (std::size_t j = 0; j < a.grid().node_count(); ++j) {
                worst = std::max(worst, std::fabs(a.at(i, n, j) - b.at(i, n, j)));
            }
        }
    }
    return worst;
}

double golden_root(std::size_t mode) {
    return read_golden(test_support::source_dir() / "tests" / "golden" / "benchmark_oracle.txt").root.at(mode);
}

}  // namespace

TEST_SUITE("fd_solver") {

TEST_CASE("zero profits give the zero field") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const ValueField v = solve_fd(p, grid1(p, 41, 40));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t n = 0; n <= 40; ++n) {
            for (std::size_t j = 0; j < 41; ++j) CHECK(v.at(i, n, j) == 0.0);
        }
    }
    CHECK(residuals(v, p).max_abs == 0.0);
}

TEST_CASE("closed-form fixtures") {
    SUBCASE("identical modes") {
        const SwitchingProblem p = test_support::fixture("identical_modes").problem;
        const ValueField v = solve_fd(p, grid1(p, 101, 200));
        CHECK(std::fabs(at_x0(v, p, 0) - 1.0) <= 1e-3);
        CHECK(std::fabs(at_x0(v, p, 1) - 1.0) <= 1e-3);
    }
    SUBCASE("deterministic") {
        const SwitchingProblem p = test_support::fixture("deterministic").problem;
        const ValueField v = solve_fd(p, grid1(p, 101, 200));
        CHECK(std::fabs(at_x0(v, p, 0) - 1.0) <= 1e-3);
        CHECK(std::fabs(at_x0(v, p, 1) - 0.9) <= 1e-3);
    }
}

TEST_CASE("benchmark against the lattice golden values") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const ValueField v = solve_fd(p, grid1(p, 201, 400));
    CHECK(std::fabs(at_x0(v, p, 0) - golden_root(0)) <= 1e-2);
    CHECK(std::fabs(at_x0(v, p, 1) - golden_root(1)) <= 1e-2);

    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 201; ++j) CHECK(v.at(i, 400, j) == 0.0);
    }
    CHECK(obstacle_check(v, p).max_violation <= 1e-12);

    const ResidualReport r = residuals(v, p);
    CHECK(r.max_abs <= 5e-2);
    CHECK(r.switching_nodes > 0);
    CHECK(r.continuation_nodes > 0);
    const ValueField fine = solve_fd(p, grid1(p, 401, 800));
    CHECK(residuals(fine, p).max_abs < r.max_abs);
    CHECK(std::fabs(at_x0(fine, p, 0) - golden_root(0)) <= std::fabs(at_x0(v, p, 0) - golden_root(0)) + 1e-6);
}

TEST_CASE("mirror symmetry of the benchmark") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const ValueField v = solve_fd(p, grid1(p, 81, 80));
    for (std::size_t n = 0; n <= 80; ++n) {
        for (std::size_t j = 0; j < 81; ++j) CHECK(std::fabs(v.at(0, n, j) - v.at(1, n, 80 - j)) <= 1e-9);
    }
}

TEST_CASE("more profit never lowers the value") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    SwitchingProblem q = p;
    q.psi[1] = parse_expr("0.1 - x1");
    const Grid g = grid1(p, 81, 80);
    const ValueField a = solve_fd(p, g);
    const ValueField b = solve_fd(q, g);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t n = 0; n <= 80; ++n) {
            for (std::size_t j = 0; j < 81; ++j) CHECK(b.at(i, n, j) >= a.at(i, n, j) - 1e-12);
        }
    }
}

TEST_CASE("explicit and implicit schemes agree to the discretisation order") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const Grid g = grid1(p, 51, 100);
    FdOptions ex;
    ex.scheme = FdScheme::explicit_euler;
    const ValueField a = solve_fd(p, g, ex);
    const ValueField b = solve_fd(p, g);
    const double bound = 10.0 * std::max(g.dt(), g.dx(0) * g.dx(0));
    CHECK(std::fabs(at_x0(a, p, 0) - at_x0(b, p, 0)) <= bound);
    CHECK(max_abs_diff(a, b) <= bound);
}

TEST_CASE("explicit steps beyond the stability bound are refused") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    FdOptions ex;
    ex.scheme = FdScheme::explicit_euler;
    CHECK_THROWS_AS(solve_fd(p, grid1(p, 201, 10), ex), SolverError);
}

TEST_CASE("projection sweep order does not matter") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const Grid g = grid1(p, 81, 80);
    FdOptions asc;
    asc.coupling = Coupling::projection;
    FdOptions desc = asc;
    desc.order = ProjectionOrder::descending;
    CHECK(max_abs_diff(solve_fd(p, g, asc), solve_fd(p, g, desc)) <= 1e-8);
}

TEST_CASE("an injected defect is located") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    ValueField v = solve_fd(p, grid1(p, 81, 80));
    const std::size_t level = 40, node = 55;
    v.at(0, level, node) += 0.1;
    const ResidualReport r = residuals(v, p);
    CHECK(r.max_abs > 1.0);
    CHECK(r.location.mode == 0);
    CHECK(r.location.node == node);
    CHECK((r.location.level == level || r.location.level + 1 == level));
}

TEST_CASE("an inert second coordinate reproduces the one-dimensional solve") {
    const std::string yaml = R"(name: embedded
dimension: 2
horizon: 1.0
modes: 2
drift: ["0", "0"]
volatility:
  - ["1", "0"]
  - ["0", "0"]
psi: ["x1", "0 - x1"]
switching_cost:
  - [~, "0.1"]
  - ["0.1", ~]
alpha: 0.1
growth: {constant: 1.0, gamma: 1.0}
diffusion_growth: 1.0
validation_box: {lo: [-5.0, -1.0], hi: [5.0, 1.0]}
fd_box: {lo: [-5.0, -1.0], hi: [5.0, 1.0]}
x0: [0.0, 0.0]
initial_mode: 1
)";
    const SwitchingProblem p2 = parse_problem_yaml(yaml).problem;
    const SwitchingProblem p1 = test_support::fixture("benchmark").problem;
    const std::array<std::size_t, 2> n2{41, 5};
    const ValueField v2 = solve_fd(p2, make_grid(p2, n2, 40));
    const ValueField v1 = solve_fd(p1, grid1(p1, 41, 40));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j1 = 0; j1 < 41; ++j1) {
            for (std::size_t j2 = 0; j2 < 5; ++j2) {
                CHECK(std::fabs(v2.at(i, 0, v2.grid().node(j1, j2)) - v1.at(i, 0, j1)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("binary cache round trip") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const Grid g = grid1(p, 41, 40);
    const ValueField v = solve_fd(p, g);
    const auto file = std::filesystem::temp_directory_path() / "switchbox_fd_cache_test.bin";
    v.save_binary(file);
    const ValueField w = ValueField::load_binary(file);
    std::filesystem::remove(file);
    CHECK(w.fingerprint() == v.fingerprint());
    CHECK(w.problem_hash() == problem_hash(p));
    CHECK(fd_cache_key(p, g, FdScheme::implicit_euler) != fd_cache_key(p, g, FdScheme::explicit_euler));
}

}
