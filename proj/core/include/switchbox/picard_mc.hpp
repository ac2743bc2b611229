#pragma once

#include "switchbox/problem.hpp"
#include "switchbox/sde.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <string>
#include <vector>

namespace switchbox {

// psi_i and g_ij evaluated once along every path of an ensemble.
class PathTables {
public:
    PathTables(const SwitchingProblem& p, const PathEnsemble& e);

    std::size_t modes() const noexcept { return modes_; }
    double psi(std::size_t mode, std::size_t path, std::size_t step) const noexcept {
        return psi_[(mode * paths_ + path) * (steps_ + 1) + step];
    }
    // g_ij at (s_step, X_step); zero on the diagonal.
    double cost(std::size_t from, std::size_t to, std::size_t path, std::size_t step) const noexcept {
        return cost_[((from * modes_ + to) * paths_ + path) * (steps_ + 1) + step];
    }
    // Trapezoid integral of psi_i over [s_step, s_{step+1}].
    double increment(std::size_t mode, std::size_t path, std::size_t step, double dt) const noexcept {
        return 0.5 * dt * (psi(mode, path, step) + psi(mode, path, step + 1));
    }
    bool psi_vanishes() const noexcept { return psi_vanishes_; }

private:
    std::size_t modes_;
    std::size_t paths_;
    std::size_t steps_;
    bool psi_vanishes_ = true;
    std::vector<double> psi_;
    std::vector<double> cost_;
};

struct ModeEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

// Iterate n of the iterated optimal stopping scheme on one ensemble.
//  y    realised cash flow from s_j onwards along each path under the estimated stopping rule
//  yhat regression estimate max(obstacle, continuation) used by the next iterate's decisions
struct SnellIterate {
    std::size_t n = 0;
    std::size_t modes = 0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::size_t degree = 0;
    std::size_t rank_reductions = 0;  // slices whose degree was lowered
    std::uint64_t ensemble_fingerprint = 0;
    std::vector<double> y;
    std::vector<double> yhat;

    std::size_t index(std::size_t mode, std::size_t path, std::size_t step) const noexcept {
        return (mode * n_paths + path) * (n_steps + 1) + step;
    }
    double value(std::size_t mode, std::size_t path, std::size_t step) const noexcept { return y[index(mode, path, step)]; }

    ModeEstimate estimate_at_t0(std::size_t mode) const;
    std::uint64_t fingerprint() const;
    // path,step,mode,y,yhat with one-based modes.
    void write_paths_csv(const std::filesystem::path& file, std::string_view preamble = {}) const;
};

// Y^{i,0}: optimal stopping of the running psi_i integral; stopping pays nothing more.
SnellIterate snell_stage0(const PathEnsemble& e, const SwitchingProblem& p, std::size_t degree = 4);
SnellIterate snell_stage0(const PathEnsemble& e, const PathTables& tables, std::size_t degree = 4);

// Y^{i,n+1}: stopping before T in mode i pays max_{k != i}(-g_ik + Y^{k,n}); at T it pays 0.
SnellIterate picard_step(const SnellIterate& prev, const PathEnsemble& e, const SwitchingProblem& p);
SnellIterate picard_step(const SnellIterate& prev, const PathEnsemble& e, const PathTables& tables);

struct McTraceEntry {
    std::size_t n = 0;
    std::vector<ModeEstimate> values;
};

struct McResult {
    SnellIterate last;
    std::vector<McTraceEntry> trace;  // one entry per computed iterate, starting at n = 0
    bool converged = false;
    ModeEstimate upper_bound;  // E[int max_i |psi_i| ds] on the ensemble
    std::vector<std::string> warnings;
};

struct McOptions {
    double tol = 1e-3;
    std::size_t n_max = 20;
    std::size_t degree = 4;
};

// Iterates until max_i |mean y_i(t0) change| < tol or n_max steps. When psi vanishes
// along every path, stage 0 is already the fixed point and is returned with n = 0.
McResult solve_mc(const SwitchingProblem& p, const PathEnsemble& e, const McOptions& options = {});

// iteration,mode,mean,standard_error with one-based modes.
void write_trace_csv(const std::vector<McTraceEntry>& trace, const std::filesystem::path& file, std::string_view preamble = {});

}  // namespace switchbox
