#pragma once

#include "switchbox/grid.hpp"
#include "switchbox/problem.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace switchbox {

struct StencilEntry {
    std::size_t column = 0;
    double weight = 0.0;
};

// One row of the discrete generator: at most a 3x3 neighbourhood.
class StencilRow {
public:
    void add(std::size_t column, double weight);
    std::span<const StencilEntry> entries() const noexcept { return {entries_.data(), size_}; }
    double weight_at(std::size_t column) const noexcept;

private:
    std::array<StencilEntry, 9> entries_{};
    std::size_t size_ = 0;
};

// Discrete form of A = 1/2 sum (sigma sigma^T)_ij d_ij + sum b_i d_i at one time level.
struct OperatorStencil {
    double time = 0.0;
    std::vector<StencilRow> rows;
    std::vector<std::string> warnings;

    double apply(std::span<const double> u, std::size_t node) const noexcept {
        double acc = 0.0;
        for (const auto& e : rows[node].entries()) acc += e.weight * u[e.column];
        return acc;
    }
    void apply(std::span<const double> u, std::span<double> out) const noexcept {
        for (std::size_t n = 0; n < rows.size(); ++n) out[n] = apply(u, n);
    }
};

// Interior: central second differences, 4-point cross stencil, drift upwinded by
// the sign of b_i at the node. On a face the second-derivative and cross terms
// are dropped (linear extrapolation to the ghost node) and the drift uses the
// inward one-sided difference. Throws SolverError at a node where sigma sigma^T
// is not positive semidefinite.
OperatorStencil discretize_generator(const SwitchingProblem& p, const Grid& g, double t);

}  // namespace switchbox
