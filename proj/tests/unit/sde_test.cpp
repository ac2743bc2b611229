#include "support.hpp"

#include "switchbox/parallel.hpp"
#include "switchbox/sde.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace switchbox;
using test_support::TwoMode;

namespace {

SwitchingProblem diffusion(const std::string& drift, const std::string& vol, double x0, double lo = -10.0,
                           double hi = 10.0) {
    TwoMode s;
    s.drift = drift;
    s.vol = vol;
    s.x0 = x0;
    s.lo = lo;
    s.hi = hi;
    return test_support::two_mode(s);
}

std::vector<double> terminal(const PathEnsemble& e) {
    std::vector<double> out(e.n_paths());
    for (std::size_t p = 0; p < e.n_paths(); ++p) out[p] = e.state(p, e.n_steps())[0];
    return out;
}

}  // namespace

TEST_SUITE("sde_sim") {

TEST_CASE("degenerate SDE stays put") {
    const SwitchingProblem p = diffusion("0", "0", 1.0);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 50, 20, 1);
    for (std::size_t path = 0; path < e.n_paths(); ++path) {
        for (std::size_t s = 0; s <= e.n_steps(); ++s) CHECK(e.state(path, s)[0] == 1.0);
    }
}

TEST_CASE("unit drift ODE reaches 1") {
    const SwitchingProblem p = diffusion("1", "0", 0.0);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 4, 64, 1);
    for (double x : terminal(e)) CHECK(std::fabs(x - 1.0) <= 1.0 / 64.0);
}

TEST_CASE("Brownian terminal law") {
    const SwitchingProblem p = diffusion("0", "1", 0.0);
    const std::size_t n = 100000;
    const PathEnsemble e = simulate(p, 0.0, p.x0, n, 8, 42);
    const auto x = terminal(e);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    CHECK(std::fabs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) <= 0.05);
}

TEST_CASE("grid and start conventions") {
    const SwitchingProblem p = diffusion("0", "1", 0.5);
    const PathEnsemble e = simulate(p, 0.25, p.x0, 10, 30, 9);
    CHECK(e.times().front() == 0.25);
    CHECK(e.times().back() == 1.0);
    for (std::size_t s = 1; s < e.times().size(); ++s) CHECK(e.times()[s] > e.times()[s - 1]);
    for (std::size_t path = 0; path < e.n_paths(); ++path) {
        CHECK(e.state(path, 0)[0] == 0.5);
        CHECK(e.state_at(path, 0.1)[0] == 0.5);
        CHECK(e.state_at(path, 0.25)[0] == 0.5);
    }
}

TEST_CASE("same seed is bitwise identical; worker count does not matter") {
    const SwitchingProblem p = test_support::fixture("gbm_power_plant").problem;
    set_thread_limit(1);
    const PathEnsemble a = simulate(p, 0.0, p.x0, 3000, 40, 5);
    set_thread_limit(3);
    const PathEnsemble b = simulate(p, 0.0, p.x0, 3000, 40, 5);
    set_thread_limit(0);
    CHECK(a.raw() == b.raw());
    CHECK(a.fingerprint() == b.fingerprint());
    const PathEnsemble c = simulate(p, 0.0, p.x0, 3000, 40, 6);
    CHECK(c.fingerprint() != a.fingerprint());
}

TEST_CASE("any path is reproducible in isolation") {
    const SwitchingProblem p = diffusion("0", "1", 0.0);
    const PathEnsemble big = simulate(p, 0.0, p.x0, 100, 16, 77);
    const PathEnsemble small = simulate(p, 0.0, p.x0, 3, 16, 77);
    for (std::size_t s = 0; s <= 16; ++s) CHECK(big.state(2, s)[0] == small.state(2, s)[0]);
}

TEST_CASE("moment of a constant ensemble") {
    const SwitchingProblem p = diffusion("0", "0", 1.0);
    const MomentReport r = moment_check(simulate(p, 0.0, p.x0, 100, 10, 1), 2);
    CHECK(r.estimate == 1.0);
    CHECK(r.standard_error == 0.0);
}

TEST_CASE("Brownian running maximum against a ten times finer reference") {
    const SwitchingProblem p = diffusion("0", "1", 0.0);
    const MomentReport coarse = moment_check(simulate(p, 0.0, p.x0, 20000, 100, 3), 2);
    const MomentReport fine = moment_check(simulate(p, 0.0, p.x0, 20000, 1000, 4), 2);
    CHECK(std::fabs(coarse.estimate - fine.estimate) <= 0.1 * fine.estimate);
    CHECK_THROWS_AS(moment_check(simulate(p, 0.0, p.x0, 10, 10, 4), 3), std::invalid_argument);
}

TEST_CASE("continuity estimate vanishes for identical inputs") {
    const SwitchingProblem p = diffusion("0", "1", 0.0);
    const PathEnsemble a = simulate(p, 0.0, p.x0, 500, 20, 8);
    const PathEnsemble b = simulate(p, 0.0, p.x0, 500, 20, 8);
    const ContinuityReport r = continuity_check(a, b);
    CHECK(r.estimate == 0.0);
    CHECK(r.implied_constant == 0.0);
}

TEST_CASE("Euler strong error on GBM shrinks by about sqrt 2 per halving") {
    // Same (seed, path, step) keys give the same Gaussian draws for every k = d = 1
    // problem, so a unit Brownian ensemble recovers W_T for the exact GBM solution.
    const double mu = 0.05, sigma = 0.4, x0 = 1.0;
    const SwitchingProblem gbm = diffusion("0.05*x1", "0.4*x1", x0, 0.0, 10.0);
    const SwitchingProblem bm = diffusion("0", "1", 0.0);
    auto strong_error = [&](std::size_t steps) {
        const PathEnsemble e = simulate(gbm, 0.0, gbm.x0, 20000, steps, 13);
        const PathEnsemble w = simulate(bm, 0.0, bm.x0, 20000, steps, 13);
        double acc = 0.0;
        for (std::size_t p = 0; p < e.n_paths(); ++p) {
            const double exact = x0 * std::exp((mu - 0.5 * sigma * sigma) + sigma * w.state(p, steps)[0]);
            const double d = e.state(p, steps)[0] - exact;
            acc += d * d;
        }
        return std::sqrt(acc / static_cast<double>(e.n_paths()));
    };
    const double e1 = strong_error(32);
    const double e2 = strong_error(64);
    const double e3 = strong_error(128);
    CHECK(e1 / e2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
}

}
