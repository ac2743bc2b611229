#include "support.hpp"

#include "switchbox/grid.hpp"
#include "switchbox/stencil.hpp"

#include <doctest.h>

#include <array>

using namespace switchbox;
using test_support::TwoMode;

TEST_SUITE("fd_solver") {

TEST_CASE("interior row of the heat operator") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const std::array<std::size_t, 1> n{11};
    const Grid g = make_grid(p, n, 10);
    const double dx = g.dx(0);
    const OperatorStencil s = discretize_generator(p, g, 0.0);
    const StencilRow& row = s.rows[5];
    CHECK(row.weight_at(4) == doctest::Approx(0.5 / (dx * dx)));
    CHECK(row.weight_at(5) == doctest::Approx(-1.0 / (dx * dx)));
    CHECK(row.weight_at(6) == doctest::Approx(0.5 / (dx * dx)));
    CHECK(row.weight_at(3) == 0.0);
}

TEST_CASE("drift is upwinded by its sign") {
    TwoMode up;
    up.drift = "1";
    up.vol = "0";
    const SwitchingProblem pu = test_support::two_mode(up);
    const std::array<std::size_t, 1> n{11};
    const Grid g = make_grid(pu, n, 10);
    const double dx = g.dx(0);
    const OperatorStencil su = discretize_generator(pu, g, 0.0);
    CHECK(su.rows[5].weight_at(6) == doctest::Approx(1.0 / dx));
    CHECK(su.rows[5].weight_at(5) == doctest::Approx(-1.0 / dx));
    CHECK(su.rows[5].weight_at(4) == 0.0);
    // the last node has no forward neighbour and looks inward
    CHECK(su.rows[10].weight_at(9) == doctest::Approx(-1.0 / dx));

    TwoMode down = up;
    down.drift = "-1";
    const OperatorStencil sd = discretize_generator(test_support::two_mode(down), g, 0.0);
    CHECK(sd.rows[5].weight_at(4) == doctest::Approx(1.0 / dx));
    CHECK(sd.rows[5].weight_at(6) == 0.0);
}

TEST_CASE("rows of a pure diffusion sum to zero") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const std::array<std::size_t, 1> n{21};
    const OperatorStencil s = discretize_generator(p, make_grid(p, n, 10), 0.3);
    for (const StencilRow& row : s.rows) {
        double sum = 0.0;
        for (const auto& e : row.entries()) sum += e.weight;
        CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("grid geometry") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const std::array<std::size_t, 1> n{11};
    const Grid g = make_grid(p, n, 4);
    CHECK(g.coordinate(0, 0) == -5.0);
    CHECK(g.coordinate(0, 10) == 5.0);
    CHECK(g.time(4) == 1.0);
    CHECK(g.is_boundary(0));
    CHECK_FALSE(g.is_boundary(5));
    const std::array<double, 1> x{1.1};
    CHECK(g.nearest_node(x) == 6);
    const std::array<std::size_t, 1> tiny{2};
    CHECK_THROWS(make_grid(p, tiny, 4));
}

}
