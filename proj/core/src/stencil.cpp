#include "switchbox/stencil.hpp"

#include "switchbox/error.hpp"
#include "util.hpp"

#include <cmath>

namespace switchbox {

void StencilRow::add(std::size_t column, double weight) {
    if (weight == 0.0) return;
    for (std::size_t i = 0; i < size_; ++i) {
        if (entries_[i].column == column) {
            entries_[i].weight += weight;
            return;
        }
    }
    if (size_ == entries_.size()) throw SolverError("stencil row overflow");
    entries_[size_++] = StencilEntry{column, weight};
}

double StencilRow::weight_at(std::size_t column) const noexcept {
    for (std::size_t i = 0; i < size_; ++i) {
        if (entries_[i].column == column) return entries_[i].weight;
    }
    return 0.0;
}

OperatorStencil discretize_generator(const SwitchingProblem& p, const Grid& g, double t) {
    const std::size_t k = g.dimension();
    if (k != 1 && k != 2) throw SolverError("discretize_generator supports k <= 2");
    OperatorStencil op;
    op.time = t;
    op.rows.resize(g.node_count());

    std::vector<double> x(k), b(k), a(k * k);
    std::array<double, 2> h{g.dx(0), k == 2 ? g.dx(1) : 1.0};
    std::size_t cross_warnings = 0;
    std::size_t first_warning_node = 0;

    for (std::size_t node = 0; node < g.node_count(); ++node) {
        g.position(node, x);
        p.diffusion.drift_at(t, x, b);
        p.diffusion.covariance_at(t, x, a);

        double trace = 0.0;
        for (std::size_t i = 0; i < k; ++i) trace += a[i * k + i];
        if (min_symmetric_eigenvalue(a, k) < -1e-12 * (1.0 + trace)) {
            throw SolverError("sigma sigma^T is not positive semidefinite at node " + std::to_string(node) + " x=" +
                              detail::format_vector(x) + " t=" + detail::format_double(t));
        }

        const auto idx = g.multi_index(node);
        std::array<std::size_t, 2> stride{1, g.n_space[0]};
        std::array<bool, 2> interior{};
        for (std::size_t d = 0; d < k; ++d) interior[d] = idx[d] > 0 && idx[d] + 1 < g.n_space[d];

        StencilRow& row = op.rows[node];
        for (std::size_t d = 0; d < k; ++d) {
            const double hd = h[d];
            if (interior[d]) {
                const double c = 0.5 * a[d * k + d] / (hd * hd);
                row.add(node - stride[d], c);
                row.add(node, -2.0 * c);
                row.add(node + stride[d], c);
            }
            // drift: upwind where the neighbour exists, inward one-sided on a face
            const bool has_lower = idx[d] > 0;
            const bool has_upper = idx[d] + 1 < g.n_space[d];
            const bool forward = (b[d] > 0.0 && has_upper) || !has_lower;
            if (b[d] != 0.0) {
                if (forward) {
                    row.add(node + stride[d], b[d] / hd);
                    row.add(node, -b[d] / hd);
                } else {
                    row.add(node, b[d] / hd);
                    row.add(node - stride[d], -b[d] / hd);
                }
            }
        }

        if (k == 2 && interior[0] && interior[1] && a[1] != 0.0) {
            const double c = a[1] / (4.0 * h[0] * h[1]);
            row.add(node + 1 + stride[1], c);
            row.add(node - 1 - stride[1], c);
            row.add(node + 1 - stride[1], -c);
            row.add(node - 1 + stride[1], -c);
            const double bound = std::min(a[0] * h[1] / h[0], a[3] * h[0] / h[1]);
            if (std::fabs(a[1]) > bound) {
                if (cross_warnings == 0) first_warning_node = node;
                ++cross_warnings;
            }
        }
    }

    if (cross_warnings > 0) {
        op.warnings.push_back("cross-derivative term exceeds the diagonal dominance bound at " + std::to_string(cross_warnings) +
                              " node(s) (first: " + std::to_string(first_warning_node) + "); stencil is not monotone");
    }
    return op;
}

}  // namespace switchbox
