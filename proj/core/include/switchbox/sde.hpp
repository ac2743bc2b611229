#pragma once

#include "switchbox/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <span>
#include <vector>

namespace switchbox {

// Seeded batch of Euler-Maruyama trajectories on a uniform grid t0 = s_0 < ... < s_n = T.
class PathEnsemble {
public:
    PathEnsemble() = default;
    PathEnsemble(std::size_t n_paths, std::size_t n_steps, std::size_t k, double t0, double horizon, std::uint64_t seed);

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t dimension() const noexcept { return k_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double t0() const noexcept { return times_.front(); }
    double horizon() const noexcept { return times_.back(); }
    double dt() const noexcept { return dt_; }
    const std::vector<double>& times() const noexcept { return times_; }

    std::span<const double> state(std::size_t path, std::size_t step) const {
        return {states_.data() + (path * (n_steps_ + 1) + step) * k_, k_};
    }
    std::span<double> state(std::size_t path, std::size_t step) {
        return {states_.data() + (path * (n_steps_ + 1) + step) * k_, k_};
    }

    // Position at an arbitrary time: frozen at the start value for s <= t0,
    // linear between grid points.
    std::vector<double> state_at(std::size_t path, double s) const;

    const std::vector<double>& raw() const noexcept { return states_; }
    std::uint64_t fingerprint() const;

    // One row per (path, step): path,step,time,x1..xk.
    void write_csv(const std::filesystem::path& file, std::string_view preamble = {}) const;

private:
    std::size_t n_paths_ = 0;
    std::size_t n_steps_ = 0;
    std::size_t k_ = 0;
    std::uint64_t seed_ = 0;
    double dt_ = 0.0;
    std::vector<double> times_;
    std::vector<double> states_;
};

// Euler-Maruyama from (t0, x0) to T. Gaussian increments come from a Philox
// stream keyed by (seed, path, step), so results do not depend on the thread count.
// A coefficient domain error aborts with SolverError naming the path and step.
PathEnsemble simulate(const SwitchingProblem& p, double t0, std::span<const double> x0, std::size_t n_paths,
                      std::size_t n_steps, std::uint64_t seed);

struct MomentReport {
    int q = 2;
    double estimate = 0.0;        // E[sup_s |X_s|^q]
    double standard_error = 0.0;
    double implied_constant = 0.0;  // estimate / (1 + |x0|^q)
};

// Empirical E[sup_s |X_s|^q] over the grid; q in {2, 4, 8}.
MomentReport moment_check(const PathEnsemble& e, int q);

struct ContinuityReport {
    double estimate = 0.0;          // E[sup_s |X_s - X'_s|^2]
    double implied_constant = 0.0;  // estimate / ((1 + |x|^2)(|x - x'|^2 + |t - t'|)), 0 when inputs coincide
};

// Pathwise comparison of two ensembles with the same path count and horizon,
// evaluated on the union of both time grids.
ContinuityReport continuity_check(const PathEnsemble& a, const PathEnsemble& b);

}  // namespace switchbox
