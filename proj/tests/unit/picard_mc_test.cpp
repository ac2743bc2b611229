#include "support.hpp"

#include "switchbox/error.hpp"
#include "switchbox/parallel.hpp"
#include "switchbox/picard_mc.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/tree_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace switchbox;
using test_support::TwoMode;

namespace {

PathEnsemble ensemble(const SwitchingProblem& p, std::size_t paths, std::size_t steps, std::uint64_t seed = 7) {
    return simulate(p, 0.0, p.x0, paths, steps, seed);
}

}  // namespace

TEST_SUITE("picard_mc") {

TEST_CASE("vanishing profits stop at stage 0") {
    const SwitchingProblem p = test_support::two_mode(TwoMode{});
    const McResult r = solve_mc(p, ensemble(p, 500, 10));
    CHECK(r.converged);
    CHECK(r.last.n == 0);
    CHECK(r.trace.size() == 1);
    CHECK(r.last.estimate_at_t0(0).mean == 0.0);
    CHECK(r.last.estimate_at_t0(1).mean == 0.0);
}

TEST_CASE("unit profit in both modes is worth the horizon") {
    TwoMode s;
    s.psi1 = s.psi2 = "1";
    const SwitchingProblem p = test_support::two_mode(s);
    const McResult r = solve_mc(p, ensemble(p, 500, 10));
    CHECK(r.converged);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(r.last.estimate_at_t0(i).mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.last.estimate_at_t0(i).standard_error == doctest::Approx(0.0));
    }
}

TEST_CASE("stage 0 is an optimal stopping value") {
    TwoMode s;
    s.psi1 = "x1";
    s.psi2 = "0 - x1";
    const SwitchingProblem p = test_support::two_mode(s);
    const PathEnsemble e = ensemble(p, 20000, 50);
    const SnellIterate y0 = snell_stage0(e, p, 6);
    const ChainApprox chain = build_chain(p, 400);
    for (std::size_t i = 0; i < 2; ++i) {
        const ModeEstimate est = y0.estimate_at_t0(i);
        CHECK(std::fabs(est.mean - solve_stopping(chain, p, i)) <= 2.0 * est.standard_error + 1e-2);
    }
}

TEST_CASE("identical modes settle after one step") {
    const SwitchingProblem p = test_support::fixture("identical_modes").problem;
    const McResult r = solve_mc(p, ensemble(p, 2000, 20));
    CHECK(r.converged);
    CHECK(r.last.n == 1);
    CHECK(r.last.estimate_at_t0(0).mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("benchmark iterates on a reduced ensemble") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const PathEnsemble e = ensemble(p, 10000, 50);
    McOptions o;
    o.degree = 8;
    const McResult r = solve_mc(p, e, o);
    CHECK(r.converged);
    CHECK(r.trace.size() <= 21);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        for (std::size_t i = 0; i < 2; ++i) {
            const ModeEstimate& prev = r.trace[k - 1].values[i];
            const ModeEstimate& cur = r.trace[k].values[i];
            CHECK(cur.mean >= prev.mean - 2.0 * cur.standard_error);
        }
    }
    const GoldenRecord g = read_golden(test_support::source_dir() / "tests" / "golden" / "benchmark_oracle.txt");
    for (std::size_t i = 0; i < 2; ++i) {
        const ModeEstimate est = r.last.estimate_at_t0(i);
        CHECK(std::fabs(est.mean - g.root[i]) <= 3.0 * est.standard_error + 1e-2);
        CHECK(est.mean <= r.upper_bound.mean + 2.0 * r.upper_bound.standard_error);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t path = 0; path < e.n_paths(); path += 97) CHECK(r.last.value(i, path, e.n_steps()) == 0.0);
    }
}

TEST_CASE("prohibitive costs leave nonnegative profits untouched") {
    TwoMode s;
    s.psi1 = "1 + x1^2";
    s.psi2 = "0.5";
    s.cost12 = s.cost21 = "10";
    const SwitchingProblem p = test_support::two_mode(s);
    const PathEnsemble e = ensemble(p, 3000, 20);
    const SnellIterate y0 = snell_stage0(e, p, 4);
    const SnellIterate y1 = picard_step(y0, e, p);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(y1.estimate_at_t0(i).mean == doctest::Approx(y0.estimate_at_t0(i).mean).epsilon(1e-12));
    }
}

TEST_CASE("an iterate cannot be continued on another ensemble") {
    const SwitchingProblem p = test_support::fixture("benchmark").problem;
    const SnellIterate y0 = snell_stage0(ensemble(p, 200, 10, 1), p, 3);
    CHECK_THROWS_AS(picard_step(y0, ensemble(p, 200, 10, 2), p), SolverError);
}

TEST_CASE("result does not depend on the worker count") {
    const SwitchingProblem p = test_support::fixture("gbm_power_plant").problem;
    const PathEnsemble e = ensemble(p, 4000, 20);
    McOptions o;
    o.degree = 4;
    set_thread_limit(1);
    const McResult a = solve_mc(p, e, o);
    set_thread_limit(3);
    const McResult b = solve_mc(p, e, o);
    set_thread_limit(0);
    CHECK(a.last.fingerprint() == b.last.fingerprint());
    CHECK(a.trace.size() == b.trace.size());
}

}
