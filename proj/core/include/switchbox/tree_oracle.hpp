#pragma once

#include "switchbox/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace switchbox {

// Recombining trinomial lattice x = x0 + j dx on levels t_L = L T / n_levels, with
// up/mid/down probabilities matching the local mean b dt and variance sigma^2 dt.
// Nodes are capped to the truncation box; values beyond the outermost node are
// extrapolated linearly.
struct ChainApprox {
    double x0 = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double horizon = 1.0;
    std::size_t n_levels = 0;
    long j_lo = 0;  // lowest node offset (<= 0)
    long j_hi = 0;
    bool time_dependent = false;
    // Per probability row (one row, or one per level when time dependent): node-major triples (down, mid, up).
    std::vector<double> probabilities;

    std::size_t node_count() const noexcept { return static_cast<std::size_t>(j_hi - j_lo + 1); }
    double x(std::size_t node) const noexcept { return x0 + static_cast<double>(static_cast<long>(node) + j_lo) * dx; }
    double time(std::size_t level) const noexcept {
        return level == n_levels ? horizon : static_cast<double>(level) * dt;
    }
    std::size_t root() const noexcept { return static_cast<std::size_t>(-j_lo); }
    const double* probs(std::size_t level, std::size_t node) const noexcept {
        const std::size_t row = time_dependent ? level : 0;
        return probabilities.data() + (row * node_count() + node) * 3;
    }
};

// Throws SolverError for k != 1 or a probability outside [0, 1] (naming the node).
ChainApprox build_chain(const SwitchingProblem& p, std::size_t n_levels);

enum : int { kContinueAction = -1 };

struct OracleValue {
    std::size_t modes = 0;
    std::size_t n_levels = 0;
    std::size_t nodes = 0;
    std::vector<double> w;    // [mode][level][node]
    std::vector<int> action;  // same layout; kContinueAction or the target mode
    std::size_t max_switch_passes = 0;

    std::size_t index(std::size_t mode, std::size_t level, std::size_t node) const noexcept {
        return (mode * (n_levels + 1) + level) * nodes + node;
    }
    double value(std::size_t mode, std::size_t level, std::size_t node) const noexcept { return w[index(mode, level, node)]; }
};

// Backward induction with same-level switching resolved by a Jacobi fixed point.
// Throws std::logic_error if that fixed point needs more than m - 1 changing passes.
OracleValue solve_dp(const ChainApprox& chain, const SwitchingProblem& p);

// Root values per mode.
std::vector<double> root_values(const OracleValue& w, const ChainApprox& chain);

// Single-mode optimal stopping of the running psi_i integral on the lattice.
double solve_stopping(const ChainApprox& chain, const SwitchingProblem& p, std::size_t mode);

struct GoldenRecord {
    std::uint64_t problem_hash = 0;
    std::size_t n_levels = 0;
    std::vector<double> root;  // rounded to 6 decimals
};

void write_golden(const GoldenRecord& g, const std::filesystem::path& file);
GoldenRecord read_golden(const std::filesystem::path& file);

}  // namespace switchbox
