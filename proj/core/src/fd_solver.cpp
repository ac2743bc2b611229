#include "switchbox/fd_solver.hpp"

#include "switchbox/error.hpp"
#include "switchbox/parallel.hpp"
#include "util.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace switchbox {

namespace {

// Node-wise psi_i(t, x) and g_ij(t, x) at one time level.
struct LevelData {
    std::vector<std::vector<double>> psi;   // [mode][node]
    std::vector<std::vector<double>> cost;  // [i*m + j][node], empty on the diagonal
};

LevelData evaluate_level(const SwitchingProblem& p, const Grid& g, double t, bool need_psi, bool need_cost) {
    const std::size_t m = p.modes;
    const std::size_t nodes = g.node_count();
    LevelData data;
    std::vector<double> x(g.dimension());
    if (need_psi) data.psi.assign(m, std::vector<double>(nodes));
    if (need_cost) data.cost.assign(m * m, {});
    if (need_cost) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i != j) data.cost[i * m + j].resize(nodes);
            }
        }
    }
    for (std::size_t node = 0; node < nodes; ++node) {
        g.position(node, x);
        try {
            if (need_psi) {
                for (std::size_t i = 0; i < m; ++i) data.psi[i][node] = p.psi_at(i, t, x);
            }
            if (need_cost) {
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                        if (i != j) data.cost[i * m + j][node] = p.cost_at(i, j, t, x);
                    }
                }
            }
        } catch (const DomainError& e) {
            throw SolverError("coefficient domain error at node " + std::to_string(node) + " x=" + detail::format_vector(x) +
                              " t=" + detail::format_double(t) + ": " + e.what());
        }
    }
    return data;
}

// Thomas factorisation of the tridiagonal I - dt A (k = 1).
class Tridiagonal {
public:
    Tridiagonal(const OperatorStencil& op, double dt, std::size_t level) : n_(op.rows.size()) {
        lower_.assign(n_, 0.0);
        diag_.assign(n_, 0.0);
        upper_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            diag_[i] = 1.0;
            for (const auto& e : op.rows[i].entries()) {
                if (e.column == i) {
                    diag_[i] -= dt * e.weight;
                } else if (e.column + 1 == i) {
                    lower_[i] -= dt * e.weight;
                } else if (e.column == i + 1) {
                    upper_[i] -= dt * e.weight;
                } else {
                    throw SolverError("implicit k=1 operator is not tridiagonal");
                }
            }
        }
        // forward elimination: store modified upper and pivots
        pivot_.assign(n_, 0.0);
        mod_upper_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double piv = diag_[i] - (i > 0 ? lower_[i] * mod_upper_[i - 1] : 0.0);
            if (!std::isfinite(piv) || std::fabs(piv) < 1e-300) {
                throw SolverError("tridiagonal solve broke down at time level " + std::to_string(level) + ", row " +
                                  std::to_string(i));
            }
            pivot_[i] = piv;
            mod_upper_[i] = upper_[i] / piv;
        }
    }

    void solve(std::span<const double> rhs, std::span<double> out) const {
        std::vector<double> y(n_);
        for (std::size_t i = 0; i < n_; ++i) y[i] = (rhs[i] - (i > 0 ? lower_[i] * y[i - 1] : 0.0)) / pivot_[i];
        for (std::size_t i = n_; i-- > 0;) out[i] = y[i] - (i + 1 < n_ ? mod_upper_[i] * out[i + 1] : 0.0);
    }

private:
    std::size_t n_;
    std::vector<double> lower_, diag_, upper_, pivot_, mod_upper_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

SparseMatrix implicit_matrix(const OperatorStencil& op, double dt) {
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(op.rows.size() * 9);
    for (std::size_t i = 0; i < op.rows.size(); ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        for (const auto& e : op.rows[i].entries()) {
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(e.column), -dt * e.weight);
        }
    }
    const auto n = static_cast<int>(op.rows.size());
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

using SparseLu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

void factorize(SparseLu& lu, const SparseMatrix& a, std::size_t level) {
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolverError("sparse LU factorisation failed at time level " + std::to_string(level) + ": " +
                          lu.lastErrorMessage());
    }
}

void solve_into(SparseLu& lu, std::span<const double> rhs, std::span<double> out, std::size_t level) {
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const Eigen::VectorXd sol = lu.solve(b);
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        throw SolverError("sparse LU solve failed at time level " + std::to_string(level));
    }
    std::copy(sol.data(), sol.data() + sol.size(), out.begin());
}

// Obstacle of mode i at one node and the smallest mode attaining it.
std::pair<double, std::size_t> obstacle_at(const ValueField& v, const LevelData& data, std::size_t i, std::size_t level,
                                           std::size_t n) {
    const std::size_t m = v.modes();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const double o = -data.cost[i * m + j][n] + v.at(j, level, n);
        if (o > best) {
            best = o;
            arg = j;
        }
    }
    return {best, arg};
}

struct Projection {
    std::size_t passes = 0;
    bool changed = false;
};

// Gauss-Seidel sweeps of v_i <- max(v_i, obstacle_i) until nothing moves by more than tol_policy.
Projection project(ValueField& v, std::size_t level, const LevelData& data, const std::vector<std::size_t>& order,
                   const FdOptions& options) {
    const std::size_t nodes = v.grid().node_count();
    Projection out;
    for (;;) {
        ++out.passes;
        double max_change = 0.0;
        for (std::size_t i : order) {
            auto vi = v.slice(i, level);
            for (std::size_t n = 0; n < nodes; ++n) {
                const double obstacle = obstacle_at(v, data, i, level, n).first;
                if (obstacle > vi[n]) {
                    max_change = std::max(max_change, obstacle - vi[n]);
                    vi[n] = obstacle;
                    out.changed = true;
                }
            }
        }
        if (max_change <= options.tol_policy) return out;
        if (out.passes >= options.max_policy_iters) {
            throw SolverError("obstacle projection did not converge at time level " + std::to_string(level) + " after " +
                              std::to_string(out.passes) + " passes (last change " + detail::format_double(max_change) +
                              ")");
        }
    }
}

// Howard's algorithm for min(v_i - obstacle_i, (I - dt A) v_i - rhs_i) = 0 on one level.
// A row switches (v_i = v_j - g_ij) when its obstacle slack is strictly below its PDE
// defect; ties continue. Returns the number of coupled solves.
std::size_t policy_iteration(ValueField& v, std::size_t level, const OperatorStencil& op, double dt,
                             const std::vector<std::vector<double>>& rhs, const LevelData& data, bool projected,
                             const FdOptions& options) {
    const std::size_t m = v.modes();
    const std::size_t nodes = v.grid().node_count();
    constexpr int kContinue = -1;
    std::vector<int> policy(m * nodes, kContinue), previous;
    std::vector<double> slack(m * nodes);
    std::vector<double> solution(m * nodes);

    for (std::size_t round = 0;; ++round) {
        bool any_switch = false;
        for (std::size_t i = 0; i < m; ++i) {
            const auto vi = v.slice(i, level);
            for (std::size_t n = 0; n < nodes; ++n) {
                const auto [obstacle, target] = obstacle_at(v, data, i, level, n);
                const double defect = vi[n] - dt * op.apply(vi, n) - rhs[i][n];
                slack[i * nodes + n] = vi[n] - obstacle;
                const bool sw = vi[n] - obstacle < defect;
                policy[i * nodes + n] = sw ? static_cast<int>(target) : kContinue;
                any_switch = any_switch || sw;
            }
        }
        // A cycle i -> j -> ... -> i at one node would make the system singular;
        // keep the member with the largest slack in continuation.
        for (std::size_t n = 0; n < nodes; ++n) {
            for (std::size_t start = 0; start < m; ++start) {
                std::vector<std::size_t> chain{start};
                int next = policy[start * nodes + n];
                while (next != kContinue) {
                    const auto j = static_cast<std::size_t>(next);
                    const auto hit = std::find(chain.begin(), chain.end(), j);
                    if (hit != chain.end()) {
                        const auto worst = *std::max_element(hit, chain.end(), [&](std::size_t a, std::size_t b) {
                            return slack[a * nodes + n] < slack[b * nodes + n];
                        });
                        policy[worst * nodes + n] = kContinue;
                        break;
                    }
                    chain.push_back(j);
                    next = policy[j * nodes + n];
                }
            }
        }
        if (round == 0 && !any_switch && !projected) return 0;  // unconstrained solve already exact
        if (round > 0 && policy == previous) return round;
        if (round >= options.max_policy_iters) {
            throw SolverError("policy iteration did not converge at time level " + std::to_string(level) + " after " +
                              std::to_string(round) + " rounds");
        }

        std::vector<Eigen::Triplet<double, int>> triplets;
        triplets.reserve(m * nodes * 9);
        Eigen::VectorXd b(static_cast<Eigen::Index>(m * nodes));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t n = 0; n < nodes; ++n) {
                const auto row = static_cast<int>(i * nodes + n);
                const int target = policy[i * nodes + n];
                if (target == kContinue) {
                    triplets.emplace_back(row, row, 1.0);
                    for (const auto& e : op.rows[n].entries()) {
                        triplets.emplace_back(row, static_cast<int>(i * nodes + e.column), -dt * e.weight);
                    }
                    b(row) = rhs[i][n];
                } else {
                    const auto j = static_cast<std::size_t>(target);
                    triplets.emplace_back(row, row, 1.0);
                    triplets.emplace_back(row, static_cast<int>(j * nodes + n), -1.0);
                    b(row) = -data.cost[i * m + j][n];
                }
            }
        }
        SparseMatrix a(static_cast<int>(m * nodes), static_cast<int>(m * nodes));
        a.setFromTriplets(triplets.begin(), triplets.end());
        a.makeCompressed();
        SparseLu lu;
        factorize(lu, a, level);
        solve_into(lu, std::span<const double>(b.data(), static_cast<std::size_t>(b.size())), solution, level);
        for (std::size_t i = 0; i < m; ++i) {
            std::copy_n(solution.begin() + static_cast<std::ptrdiff_t>(i * nodes), nodes, v.slice(i, level).begin());
        }
        previous = policy;
    }
}

void merge_warnings(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& w : from) {
        if (std::find(into.begin(), into.end(), w) == into.end()) into.push_back(w);
    }
}

NodeLocation make_location(const Grid& g, std::size_t mode, std::size_t level, std::size_t node) {
    NodeLocation loc;
    loc.mode = mode;
    loc.level = level;
    loc.node = node;
    loc.t = g.time(level);
    loc.x.resize(g.dimension());
    g.position(node, loc.x);
    return loc;
}

}  // namespace

ValueField solve_fd(const SwitchingProblem& p, const Grid& grid, const FdOptions& options) {
    p.check_structure();
    if (grid.dimension() != p.dimension()) throw SolverError("grid dimension does not match the problem");
    const std::size_t m = p.modes;
    const std::size_t nodes = grid.node_count();
    const double dt = grid.dt();
    const bool implicit = options.scheme == FdScheme::implicit_euler;

    if (!implicit) {
        const double limit = explicit_stability_limit(p, grid);
        if (dt > limit * (1.0 + 1e-12)) {
            throw SolverError("explicit scheme unstable: dt = " + detail::format_double(dt) + " exceeds the bound " +
                              detail::format_double(limit));
        }
    }

    ValueField v(grid, m, problem_hash(p));
    v.scheme = options.scheme;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (options.order == ProjectionOrder::descending) std::reverse(order.begin(), order.end());

    std::vector<std::vector<double>> rhs(m, std::vector<double>(nodes));
    for (std::size_t level = grid.n_time; level-- > 0;) {
        const double t_step = implicit ? grid.time(level) : grid.time(level + 1);
        const OperatorStencil op = discretize_generator(p, grid, t_step);
        merge_warnings(v.warnings, op.warnings);
        const LevelData step_data = evaluate_level(p, grid, t_step, true, false);

        if (!implicit) {
            for (std::size_t i = 0; i < m; ++i) {
                const auto next = v.slice(i, level + 1);
                auto cur = v.slice(i, level);
                parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t n = begin; n < end; ++n) {
                        cur[n] = next[n] + dt * (op.apply(next, n) + step_data.psi[i][n]);
                    }
                });
            }
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                const auto next = v.slice(i, level + 1);
                for (std::size_t n = 0; n < nodes; ++n) rhs[i][n] = next[n] + dt * step_data.psi[i][n];
            }
            if (grid.dimension() == 1) {
                const Tridiagonal solver(op, dt, level);
                parallel_for(m, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) solver.solve(rhs[i], v.slice(i, level));
                });
            } else {
                SparseLu lu;
                factorize(lu, implicit_matrix(op, dt), level);
                for (std::size_t i = 0; i < m; ++i) solve_into(lu, rhs[i], v.slice(i, level), level);
            }
        }

        const LevelData proj = evaluate_level(p, grid, grid.time(level), false, true);
        const Projection first = project(v, level, proj, order, options);
        v.max_projection_passes = std::max(v.max_projection_passes, first.passes);
        if (implicit && options.coupling == Coupling::policy_iteration) {
            const std::size_t rounds = policy_iteration(v, level, op, dt, rhs, proj, first.changed, options);
            v.max_policy_iterations = std::max(v.max_policy_iterations, rounds);
            if (rounds > 0) {
                // clears rounding left by the coupled solve
                const Projection last = project(v, level, proj, order, options);
                v.max_projection_passes = std::max(v.max_projection_passes, last.passes);
            }
        }
    }
    return v;
}

ResidualReport residuals(const ValueField& v, const SwitchingProblem& p, double slack_tol, ResidualForm form) {
    const Grid& g = v.grid();
    const std::size_t m = v.modes();
    const std::size_t nodes = g.node_count();
    const double dt = g.dt();
    ResidualReport rep;
    rep.location = make_location(g, 0, 0, 0);

    OperatorStencil op_next = discretize_generator(p, g, g.time(0));
    LevelData data_next = evaluate_level(p, g, g.time(0), true, true);
    for (std::size_t level = 0; level < g.n_time; ++level) {
        const OperatorStencil op = std::move(op_next);
        const LevelData data = std::move(data_next);
        const bool centered = form == ResidualForm::centered;
        if (centered) {
            op_next = discretize_generator(p, g, g.time(level + 1));
            data_next = evaluate_level(p, g, g.time(level + 1), true, true);
        } else if (level + 1 < g.n_time) {
            op_next = discretize_generator(p, g, g.time(level + 1));
            data_next = evaluate_level(p, g, g.time(level + 1), true, true);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const auto vi = v.slice(i, level);
            const auto vnext = v.slice(i, level + 1);
            for (std::size_t n = 0; n < nodes; ++n) {
                if (g.is_boundary(n)) continue;
                const double slack = vi[n] - obstacle_at(v, data, i, level, n).first;
                double pde = -(vnext[n] - vi[n]) / dt;
                if (centered) {
                    pde -= 0.5 * (op.apply(vi, n) + op_next.apply(vnext, n)) + 0.5 * (data.psi[i][n] + data_next.psi[i][n]);
                } else {
                    pde -= op.apply(vi, n) + data.psi[i][n];
                }
                const double r = std::min(slack, pde);
                if (slack > slack_tol) {
                    ++rep.continuation_nodes;
                } else {
                    ++rep.switching_nodes;
                }
                if (std::fabs(r) > rep.max_abs) {
                    rep.max_abs = std::fabs(r);
                    rep.location = make_location(g, i, level, n);
                }
            }
        }
    }
    return rep;
}

ObstacleReport obstacle_check(const ValueField& v, const SwitchingProblem& p) {
    const Grid& g = v.grid();
    ObstacleReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t level = 0; level <= g.n_time; ++level) {
        const LevelData data = evaluate_level(p, g, g.time(level), false, true);
        for (std::size_t i = 0; i < v.modes(); ++i) {
            for (std::size_t n = 0; n < g.node_count(); ++n) {
                const double viol = obstacle_at(v, data, i, level, n).first - v.at(i, level, n);
                if (viol > rep.max_violation) {
                    rep.max_violation = viol;
                    rep.location = make_location(g, i, level, n);
                }
            }
        }
    }
    return rep;
}

}  // namespace switchbox
