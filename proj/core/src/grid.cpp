#include "switchbox/grid.hpp"

#include "switchbox/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace switchbox {

std::size_t Grid::node_count() const noexcept {
    std::size_t n = 1;
    for (std::size_t s : n_space) n *= s;
    return n;
}

std::array<std::size_t, 2> Grid::multi_index(std::size_t node) const noexcept {
    if (n_space.size() == 1) return {node, 0};
    return {node % n_space[0], node / n_space[0]};
}

void Grid::position(std::size_t node, std::span<double> x) const noexcept {
    const auto idx = multi_index(node);
    for (std::size_t d = 0; d < n_space.size(); ++d) x[d] = coordinate(d, idx[d]);
}

bool Grid::is_boundary(std::size_t node) const noexcept {
    const auto idx = multi_index(node);
    for (std::size_t d = 0; d < n_space.size(); ++d) {
        if (idx[d] == 0 || idx[d] + 1 == n_space[d]) return true;
    }
    return false;
}

std::size_t Grid::nearest_level(double t) const noexcept {
    const double pos = std::round(t / dt());
    if (!(pos > 0.0)) return 0;
    return std::min(n_time, static_cast<std::size_t>(pos));
}

std::size_t Grid::nearest_node(std::span<const double> x) const noexcept {
    std::array<std::size_t, 2> idx{0, 0};
    for (std::size_t d = 0; d < n_space.size(); ++d) {
        const double pos = std::round((x[d] - bounds.lo[d]) / dx(d));
        idx[d] = pos > 0.0 ? std::min(n_space[d] - 1, static_cast<std::size_t>(pos)) : 0;
    }
    return node(idx[0], idx[1]);
}

Box default_fd_box(const SwitchingProblem& p) {
    if (p.fd_box) return *p.fd_box;
    const std::size_t k = p.dimension();
    std::vector<double> b(k), cov(k * k);
    p.diffusion.drift_at(0.0, p.x0, b);
    p.diffusion.covariance_at(0.0, p.x0, cov);
    Box box;
    for (std::size_t i = 0; i < k; ++i) {
        const double half = std::max(1.0, 5.0 * std::sqrt(cov[i * k + i] * p.horizon) + std::fabs(b[i]) * p.horizon);
        box.lo.push_back(p.x0[i] - half);
        box.hi.push_back(p.x0[i] + half);
    }
    return box;
}

Grid make_grid(const SwitchingProblem& p, std::span<const std::size_t> n_space, std::size_t n_time) {
    const std::size_t k = p.dimension();
    if (k != 1 && k != 2) throw SolverError("finite differences support k = 1 or 2 (got k = " + std::to_string(k) + ")");
    if (n_space.size() != k) throw SolverError("grid needs one node count per state dimension");
    for (std::size_t n : n_space) {
        if (n < 3) throw SolverError("grid needs at least 3 nodes per dimension");
    }
    if (n_time < 1) throw SolverError("grid needs at least one time step");
    Grid g;
    g.bounds = default_fd_box(p);
    g.n_space.assign(n_space.begin(), n_space.end());
    g.n_time = n_time;
    g.horizon = p.horizon;
    if (!g.bounds.strictly_contains(p.x0)) throw SolverError("x0 must lie strictly inside the grid bounds");
    return g;
}

double explicit_stability_limit(const SwitchingProblem& p, const Grid& g) {
    const std::size_t k = g.dimension();
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < k; ++d) h = std::min(h, g.dx(d));
    std::vector<double> x(k), b(k), cov(k * k);
    bool time_dependent = false;
    for (const auto& e : p.diffusion.drift) time_dependent = time_dependent || e.uses_time();
    for (const auto& e : p.diffusion.volatility) time_dependent = time_dependent || e.uses_time();
    double limit = std::numeric_limits<double>::infinity();
    for (std::size_t level = 0; level <= g.n_time; ++level) {
        const double t = g.time(level);
        for (std::size_t node = 0; node < g.node_count(); ++node) {
            g.position(node, x);
            p.diffusion.drift_at(t, x, b);
            p.diffusion.covariance_at(t, x, cov);
            double a_max = 0.0, b_max = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                a_max = std::max(a_max, cov[i * k + i]);
                b_max = std::max(b_max, std::fabs(b[i]));
            }
            const double denom = static_cast<double>(k) * a_max + h * b_max;
            if (denom > 0.0) limit = std::min(limit, h * h / denom);
        }
        if (!time_dependent) break;  // one level suffices
    }
    return limit;
}

}  // namespace switchbox
