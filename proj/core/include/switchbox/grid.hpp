#pragma once

#include "switchbox/problem.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace switchbox {

// Tensor space grid (k <= 2) crossed with a uniform time grid on [0, T].
// Space nodes are numbered with the first dimension fastest.
struct Grid {
    Box bounds;
    std::vector<std::size_t> n_space;
    std::size_t n_time = 0;
    double horizon = 1.0;

    std::size_t dimension() const noexcept { return n_space.size(); }
    std::size_t node_count() const noexcept;
    double dt() const noexcept { return horizon / static_cast<double>(n_time); }
    double dx(std::size_t dim) const noexcept {
        return (bounds.hi[dim] - bounds.lo[dim]) / static_cast<double>(n_space[dim] - 1);
    }
    double time(std::size_t level) const noexcept {
        return level == n_time ? horizon : static_cast<double>(level) * dt();
    }
    double coordinate(std::size_t dim, std::size_t index) const noexcept {
        return index + 1 == n_space[dim] ? bounds.hi[dim] : bounds.lo[dim] + static_cast<double>(index) * dx(dim);
    }

    std::array<std::size_t, 2> multi_index(std::size_t node) const noexcept;
    std::size_t node(std::size_t i0, std::size_t i1 = 0) const noexcept { return i0 + i1 * n_space[0]; }
    void position(std::size_t node, std::span<double> x) const noexcept;
    bool is_boundary(std::size_t node) const noexcept;

    std::size_t nearest_level(double t) const noexcept;
    std::size_t nearest_node(std::span<const double> x) const noexcept;
};

// Truncation box: the problem's fd_box when declared, otherwise x0 +- (5 sigma sqrt(T) + |b| T)
// per dimension with coefficients frozen at (0, x0); at least 1 on each side.
Box default_fd_box(const SwitchingProblem& p);

// Throws SolverError when k is not 1 or 2, counts are below 3, or x0 is not strictly inside.
Grid make_grid(const SwitchingProblem& p, std::span<const std::size_t> n_space, std::size_t n_time);

// Largest dt allowed for the explicit scheme: min over levels and nodes of
// dx^2 / (k * max_i (sigma sigma^T)_ii + dx * max_i |b_i|), with dx the smallest spacing.
double explicit_stability_limit(const SwitchingProblem& p, const Grid& g);

}  // namespace switchbox
