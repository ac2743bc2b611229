#pragma once

#include "switchbox/grid.hpp"
#include "switchbox/problem.hpp"
#include "switchbox/problem_io.hpp"
#include "switchbox/stencil.hpp"
#include "switchbox/value_field.hpp"

#include <cstddef>
#include <vector>

namespace switchbox {

// Sweep order of the within-step obstacle projection over modes.
enum class ProjectionOrder { ascending, descending };

// How the implicit scheme couples the modes within a time level.
//  projection:       unconstrained solve per mode, then the projection fixed point.
//  policy_iteration: the projection result seeds Howard's algorithm on the coupled
//                    system min(v_i - obstacle_i, (I - dt A) v_i - rhs_i) = 0.
// The explicit scheme is exact with projection alone and ignores this setting.
enum class Coupling { policy_iteration, projection };

struct FdOptions {
    FdScheme scheme = FdScheme::implicit_euler;
    Coupling coupling = Coupling::policy_iteration;
    double tol_policy = 1e-12;
    std::size_t max_policy_iters = 100;
    ProjectionOrder order = ProjectionOrder::ascending;
};

// Backward sweep from v(T) = 0. Each level takes an unconstrained step per mode
// (explicit, or implicit with a direct solve) and then repeats the projection
// v_i <- max(v_i, max_{j != i}(-g_ij + v_j)) over all modes until no node moves
// by more than tol_policy. Implicit levels are then refined by policy iteration
// unless coupling is projection.
//
// Throws SolverError if the explicit scheme violates the stability bound, either
// inner loop needs more than max_policy_iters rounds, or a linear solve breaks down.
ValueField solve_fd(const SwitchingProblem& p, const Grid& grid, const FdOptions& options = {});

struct NodeLocation {
    std::size_t mode = 0;
    std::size_t level = 0;
    std::size_t node = 0;
    double t = 0.0;
    std::vector<double> x;
};

struct ResidualReport {
    double max_abs = 0.0;
    NodeLocation location;
    std::size_t continuation_nodes = 0;  // obstacle slack > slack_tol
    std::size_t switching_nodes = 0;
};

enum class ResidualForm { backward, centered };

// r = min(v_i - obstacle_i, -(v_i^{n+1} - v_i^n)/dt - L_i) at every spatially interior
// node and every level below T, where L_i is A(t_n) v_i^n + psi_i(t_n) (backward) or the
// average of that and A(t_{n+1}) v_i^{n+1} + psi_i(t_{n+1}) (centered).
ResidualReport residuals(const ValueField& v, const SwitchingProblem& p, double slack_tol = 1e-8,
                         ResidualForm form = ResidualForm::centered);

struct ObstacleReport {
    double max_violation = 0.0;  // max over nodes of obstacle_i - v_i (<= 0 when satisfied)
    NodeLocation location;
};

ObstacleReport obstacle_check(const ValueField& v, const SwitchingProblem& p);

}  // namespace switchbox
