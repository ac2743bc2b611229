#pragma once

#include "switchbox/problem.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/tree_oracle.hpp"
#include "switchbox/value_field.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace switchbox {

inline constexpr double kDefaultTieTol = 1e-8 + 10.0 * 1e-12;

// Action per (mode, level, node): kContinueAction or the target mode.
struct PolicyField {
    Grid grid;
    std::size_t modes = 0;
    double tie_tol = kDefaultTieTol;
    std::vector<int> action;

    int at(std::size_t mode, std::size_t level, std::size_t node) const noexcept {
        return action[(mode * (grid.n_time + 1) + level) * grid.node_count() + node];
    }
};

// Switch to the smallest j attaining max_{j != i}(-g_ij + v_j) wherever
// v_i <= that obstacle + tie_tol; continue elsewhere. The terminal level always continues.
PolicyField extract_policy(const ValueField& v, const SwitchingProblem& p, double tie_tol = kDefaultTieTol);

// For k = 1: per level, the largest x at which mode `mode` switches (NaN when it never does).
std::vector<double> switching_boundary(const PolicyField& policy, std::size_t mode);
std::vector<double> switching_boundary(const OracleValue& w, const ChainApprox& chain, std::size_t mode);

struct SwitchEvent {
    double tau = 0.0;
    std::size_t step = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    double profit_to_date = 0.0;  // after paying this switch
};

struct StrategyTrace {
    std::vector<SwitchEvent> switches;
    double profit = 0.0;
    bool truncated = false;  // left the grid box; mode frozen from then on
};

struct StrategySummary {
    std::size_t n_paths = 0;
    double mean_profit = 0.0;
    double standard_error = 0.0;
    std::size_t truncated = 0;
    std::size_t total_switches = 0;
    std::size_t max_switches = 0;
    std::size_t churn = 0;  // i -> j followed by j -> i at the same time
};

struct StrategyRun {
    std::vector<StrategyTrace> traces;
    StrategySummary summary;
};

// Runs every path forward from (t0, x0, initial_mode). Switching happens at ensemble
// times before T, using the action at the nearest grid level and node; several switches
// may be chained at one time (at most m - 1). Profit uses the trapezoid rule per step.
// Throws SolverError when more than 5% of the paths leave the grid box.
StrategyRun simulate_strategy(const PolicyField& policy, const PathEnsemble& e, const SwitchingProblem& p);

// Independent recomputation of one trace's profit from the raw path and its switches.
double recompute_profit(const StrategyTrace& trace, const PathEnsemble& e, const SwitchingProblem& p, std::size_t path,
                        std::size_t initial_mode);
// Number of traces whose reported profit differs from the recomputation.
std::size_t accounting_mismatches(const StrategyRun& run, const PathEnsemble& e, const SwitchingProblem& p);

// path,n,tau,from_mode,to_mode,profit_to_date with one-based modes; n = 0 rows carry the final profit.
void write_traces_csv(const StrategyRun& run, const std::filesystem::path& file, std::string_view preamble = {});

struct TailRow {
    std::size_t n = 0;
    double probability = 0.0;      // P[tau_n < T]
    double scaled = 0.0;           // n * probability
    double relative_error = 0.0;   // sqrt((1 - P) / (N P)), 0 when P = 0
    double bound = 0.0;            // small-n maximum * (1 + multiple * relative_error)
};

struct TailReport {
    std::size_t n_traces = 0;
    std::vector<TailRow> rows;  // n = 1 .. largest observed count
    double small_n_max = 0.0;   // max_{n <= 2} n P[tau_n < T]
    double fitted_constant = 0.0;  // max_n n P[tau_n < T]
    double worst_ratio = 0.0;      // max_{n > 2} scaled / bound (0 if none)
    bool bounded = true;
};

inline constexpr std::size_t kTailMinimumTraces = 10000;

// Throws std::invalid_argument below kTailMinimumTraces traces.
TailReport switch_statistics(const std::vector<StrategyTrace>& traces, double relative_se_multiple = 3.0);

struct DppReport {
    std::size_t n = 0;
    double lhs = 0.0;  // v_{initial}(t0, x0)
    double rhs = 0.0;  // mean over paths
    double standard_error = 0.0;
    double reached = 0.0;  // fraction of paths with tau_n < T
};

// Right side: running profit up to the n-th switch of the extracted policy minus costs,
// plus v of the mode entered at tau_n when tau_n < T.
DppReport check_dpp(const ValueField& v, const SwitchingProblem& p, const PathEnsemble& e, std::size_t n,
                    double tie_tol = kDefaultTieTol);

struct RandomStrategyReport {
    std::size_t strategies = 0;
    std::size_t paths = 0;
    double optimal_mean = 0.0;
    std::vector<double> means;             // per random strategy
    std::vector<double> paired_standard_errors;
    double worst_excess = 0.0;  // max over strategies of (mean - optimal) / SE of the paired difference
    std::size_t beaten_by = 0;  // strategies with mean > optimal + 2 SE
};

// Random admissible strategies: Poisson switch times with a per-strategy intensity and
// uniformly drawn target modes, evaluated on the first `max_paths` paths of the run's
// ensemble and compared path by path with the policy's profit there.
RandomStrategyReport random_strategy_check(const StrategyRun& optimal, const PathEnsemble& e, const SwitchingProblem& p,
                                           std::size_t n_strategies, std::size_t max_paths, std::uint64_t seed);

}  // namespace switchbox
