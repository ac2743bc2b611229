#include "switchbox/strategy.hpp"

#include "switchbox/error.hpp"
#include "switchbox/parallel.hpp"
#include "switchbox/picard_mc.hpp"
#include "switchbox/rng.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace switchbox {

PolicyField extract_policy(const ValueField& v, const SwitchingProblem& p, double tie_tol) {
    const Grid& g = v.grid();
    const std::size_t m = v.modes();
    const std::size_t nodes = g.node_count();
    PolicyField pol;
    pol.grid = g;
    pol.modes = m;
    pol.tie_tol = tie_tol;
    pol.action.assign(m * (g.n_time + 1) * nodes, kContinueAction);
    std::vector<double> x(g.dimension());
    for (std::size_t level = 0; level < g.n_time; ++level) {
        const double t = g.time(level);
        for (std::size_t n = 0; n < nodes; ++n) {
            g.position(n, x);
            for (std::size_t i = 0; i < m; ++i) {
                double best = -std::numeric_limits<double>::infinity();
                int target = kContinueAction;
                for (std::size_t j = 0; j < m; ++j) {
                    if (j == i) continue;
                    const double o = -p.cost_at(i, j, t, x) + v.at(j, level, n);
                    if (o > best) {
                        best = o;
                        target = static_cast<int>(j);
                    }
                }
                if (v.at(i, level, n) <= best + tie_tol) pol.action[(i * (g.n_time + 1) + level) * nodes + n] = target;
            }
        }
    }
    return pol;
}

std::vector<double> switching_boundary(const PolicyField& policy, std::size_t mode) {
    if (policy.grid.dimension() != 1) throw std::invalid_argument("switching_boundary needs k = 1");
    std::vector<double> out(policy.grid.n_time + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t level = 0; level <= policy.grid.n_time; ++level) {
        for (std::size_t n = 0; n < policy.grid.node_count(); ++n) {
            if (policy.at(mode, level, n) != kContinueAction) out[level] = policy.grid.coordinate(0, n);
        }
    }
    return out;
}

std::vector<double> switching_boundary(const OracleValue& w, const ChainApprox& chain, std::size_t mode) {
    std::vector<double> out(w.n_levels + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t level = 0; level <= w.n_levels; ++level) {
        for (std::size_t n = 0; n < w.nodes; ++n) {
            if (w.action[w.index(mode, level, n)] != kContinueAction) out[level] = chain.x(n);
        }
    }
    return out;
}

namespace {

double psi_checked(const SwitchingProblem& p, std::size_t mode, double t, std::span<const double> x, std::size_t path,
                   std::size_t step) {
    try {
        return p.psi_at(mode, t, x);
    } catch (const DomainError& e) {
        throw SolverError("coefficient domain error on path " + std::to_string(path) + " at step " + std::to_string(step) +
                          ": " + e.what());
    }
}

double cost_checked(const SwitchingProblem& p, std::size_t from, std::size_t to, double t, std::span<const double> x,
                    std::size_t path, std::size_t step) {
    try {
        return p.cost_at(from, to, t, x);
    } catch (const DomainError& e) {
        throw SolverError("coefficient domain error on path " + std::to_string(path) + " at step " + std::to_string(step) +
                          ": " + e.what());
    }
}

struct Walk {
    StrategyTrace trace;
    std::size_t mode = 0;
    std::size_t churn = 0;
    bool stopped = false;
    std::size_t stop_step = 0;
};

// Follows the policy along one path; with stop_after > 0 it halts right after that many switches.
Walk walk_path(const PolicyField& policy, const PathEnsemble& e, const SwitchingProblem& p, std::size_t path,
               std::size_t stop_after) {
    const Grid& g = policy.grid;
    const auto& times = e.times();
    const double dt = e.dt();
    const std::size_t m = policy.modes;
    Walk w;
    w.mode = p.initial_mode;
    double profit = 0.0;
    for (std::size_t step = 0; step < e.n_steps(); ++step) {
        const double t = times[step];
        const auto x = e.state(path, step);
        if (!w.trace.truncated && !g.bounds.contains(x)) w.trace.truncated = true;
        if (!w.trace.truncated) {
            const std::size_t level = g.nearest_level(t);
            const std::size_t node = g.nearest_node(x);
            const std::size_t chain_start = w.trace.switches.size();
            for (std::size_t c = 0; c + 1 < m; ++c) {
                const int a = policy.at(w.mode, level, node);
                if (a == kContinueAction) break;
                const auto to = static_cast<std::size_t>(a);
                for (std::size_t s = chain_start; s < w.trace.switches.size(); ++s) {
                    if (w.trace.switches[s].from == to) ++w.churn;
                }
                profit -= cost_checked(p, w.mode, to, t, x, path, step);
                w.trace.switches.push_back(SwitchEvent{t, step, w.mode, to, profit});
                w.mode = to;
                if (stop_after > 0 && w.trace.switches.size() == stop_after) {
                    w.stopped = true;
                    w.stop_step = step;
                    w.trace.profit = profit;
                    return w;
                }
            }
        }
        profit += 0.5 * dt *
                  (psi_checked(p, w.mode, t, x, path, step) +
                   psi_checked(p, w.mode, times[step + 1], e.state(path, step + 1), path, step + 1));
    }
    w.trace.profit = profit;
    return w;
}

ModeEstimate mean_and_error(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

StrategyRun simulate_strategy(const PolicyField& policy, const PathEnsemble& e, const SwitchingProblem& p) {
    if (policy.modes != p.modes) throw std::invalid_argument("policy and problem disagree on the mode count");
    const std::size_t n = e.n_paths();
    StrategyRun run;
    run.traces.resize(n);
    std::vector<std::size_t> churn(n, 0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            Walk w = walk_path(policy, e, p, path, 0);
            churn[path] = w.churn;
            run.traces[path] = std::move(w.trace);
        }
    });

    StrategySummary& s = run.summary;
    s.n_paths = n;
    std::vector<double> profits(n);
    for (std::size_t path = 0; path < n; ++path) {
        const auto& tr = run.traces[path];
        profits[path] = tr.profit;
        s.truncated += tr.truncated ? 1 : 0;
        s.total_switches += tr.switches.size();
        s.max_switches = std::max(s.max_switches, tr.switches.size());
        s.churn += churn[path];
    }
    const ModeEstimate est = mean_and_error(profits);
    s.mean_profit = est.mean;
    s.standard_error = est.standard_error;
    if (static_cast<double>(s.truncated) > 0.05 * static_cast<double>(n)) {
        throw SolverError(std::to_string(s.truncated) + " of " + std::to_string(n) +
                          " strategy paths left the grid box (more than 5%)");
    }
    return run;
}

double recompute_profit(const StrategyTrace& trace, const PathEnsemble& e, const SwitchingProblem& p, std::size_t path,
                        std::size_t initial_mode) {
    const auto& times = e.times();
    const double dt = e.dt();
    std::size_t mode = initial_mode;
    std::size_t next = 0;
    double profit = 0.0;
    for (std::size_t step = 0; step < e.n_steps(); ++step) {
        const auto x = e.state(path, step);
        for (; next < trace.switches.size() && trace.switches[next].step == step; ++next) {
            const SwitchEvent& ev = trace.switches[next];
            if (ev.from != mode) return std::numeric_limits<double>::quiet_NaN();
            profit -= p.cost_at(ev.from, ev.to, times[step], x);
            mode = ev.to;
        }
        profit += 0.5 * dt * (p.psi_at(mode, times[step], x) + p.psi_at(mode, times[step + 1], e.state(path, step + 1)));
    }
    if (next != trace.switches.size()) return std::numeric_limits<double>::quiet_NaN();
    return profit;
}

std::size_t accounting_mismatches(const StrategyRun& run, const PathEnsemble& e, const SwitchingProblem& p) {
    std::size_t bad = 0;
    for (std::size_t path = 0; path < run.traces.size(); ++path) {
        const double again = recompute_profit(run.traces[path], e, p, path, p.initial_mode);
        if (!(again == run.traces[path].profit)) ++bad;
    }
    return bad;
}

void write_traces_csv(const StrategyRun& run, const std::filesystem::path& file, std::string_view preamble) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << preamble;
    out << "path,n,tau,from_mode,to_mode,profit_to_date\n";
    for (std::size_t path = 0; path < run.traces.size(); ++path) {
        const auto& tr = run.traces[path];
        for (std::size_t i = 0; i < tr.switches.size(); ++i) {
            const auto& ev = tr.switches[i];
            out << path << ',' << i + 1 << ',' << detail::format_double(ev.tau) << ',' << ev.from + 1 << ',' << ev.to + 1 << ','
                << detail::format_double(ev.profit_to_date) << '\n';
        }
    }
    for (std::size_t path = 0; path < run.traces.size(); ++path) {
        out << path << ",0,,,," << detail::format_double(run.traces[path].profit) << '\n';
    }
}

TailReport switch_statistics(const std::vector<StrategyTrace>& traces, double relative_se_multiple) {
    if (traces.size() < kTailMinimumTraces) {
        throw std::invalid_argument("switch_statistics needs at least 10^4 traces (got " + std::to_string(traces.size()) + ")");
    }
    TailReport rep;
    rep.n_traces = traces.size();
    std::size_t max_count = 0;
    for (const auto& t : traces) max_count = std::max(max_count, t.switches.size());
    std::vector<std::size_t> at_least(max_count + 2, 0);
    for (const auto& t : traces) {
        for (std::size_t n = 1; n <= t.switches.size(); ++n) ++at_least[n];
    }
    const double total = static_cast<double>(traces.size());
    for (std::size_t n = 1; n <= max_count; ++n) {
        TailRow row;
        row.n = n;
        row.probability = static_cast<double>(at_least[n]) / total;
        row.scaled = static_cast<double>(n) * row.probability;
        row.relative_error = row.probability > 0.0 ? std::sqrt((1.0 - row.probability) / (total * row.probability)) : 0.0;
        rep.rows.push_back(row);
        if (n <= 2) rep.small_n_max = std::max(rep.small_n_max, row.scaled);
        rep.fitted_constant = std::max(rep.fitted_constant, row.scaled);
    }
    for (auto& row : rep.rows) {
        row.bound = rep.small_n_max * (1.0 + relative_se_multiple * row.relative_error);
        if (row.n <= 2) continue;
        const double ratio = row.bound > 0.0 ? row.scaled / row.bound : (row.scaled > 0.0 ? 1e300 : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (row.scaled > row.bound) rep.bounded = false;
    }
    return rep;
}

DppReport check_dpp(const ValueField& v, const SwitchingProblem& p, const PathEnsemble& e, std::size_t n, double tie_tol) {
    if (n < 1) throw std::invalid_argument("check_dpp needs n >= 1");
    const PolicyField policy = extract_policy(v, p, tie_tol);
    const std::size_t paths = e.n_paths();
    std::vector<double> rhs(paths);
    std::vector<char> reached(paths, 0);
    parallel_for(paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            const Walk w = walk_path(policy, e, p, path, n);
            double value = w.trace.profit;
            if (w.stopped) {
                value += v.interpolate(w.mode, e.times()[w.stop_step], e.state(path, w.stop_step));
                reached[path] = 1;
            }
            rhs[path] = value;
        }
    });
    DppReport rep;
    rep.n = n;
    rep.lhs = v.interpolate(p.initial_mode, e.t0(), p.x0);
    const ModeEstimate est = mean_and_error(rhs);
    rep.rhs = est.mean;
    rep.standard_error = est.standard_error;
    std::size_t count = 0;
    for (char c : reached) count += c ? 1 : 0;
    rep.reached = static_cast<double>(count) / static_cast<double>(paths);
    return rep;
}

RandomStrategyReport random_strategy_check(const StrategyRun& optimal, const PathEnsemble& e, const SwitchingProblem& p,
                                           std::size_t n_strategies, std::size_t max_paths, std::uint64_t seed) {
    if (optimal.traces.size() != e.n_paths()) throw std::invalid_argument("strategy run does not match the ensemble");
    const std::size_t m = p.modes;
    const std::size_t paths = std::min(max_paths, e.n_paths());
    const std::size_t steps = e.n_steps();
    const auto& times = e.times();
    const double dt = e.dt();

    std::vector<double> psi(m * paths * (steps + 1));
    parallel_for(paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            for (std::size_t s = 0; s <= steps; ++s) {
                for (std::size_t i = 0; i < m; ++i) {
                    psi[(i * paths + path) * (steps + 1) + s] = psi_checked(p, i, times[s], e.state(path, s), path, s);
                }
            }
        }
    });

    RandomStrategyReport rep;
    rep.strategies = n_strategies;
    rep.paths = paths;
    std::vector<double> opt(paths);
    for (std::size_t path = 0; path < paths; ++path) opt[path] = optimal.traces[path].profit;
    rep.optimal_mean = mean_and_error(opt).mean;
    rep.means.assign(n_strategies, 0.0);
    rep.paired_standard_errors.assign(n_strategies, 0.0);

    parallel_for(n_strategies, [&](std::size_t begin, std::size_t end) {
        std::vector<double> diff(paths), profit(paths);
        for (std::size_t s = begin; s < end; ++s) {
            const auto stream_step = static_cast<std::uint32_t>(s);
            const double rate = 0.25 + 4.75 * NormalStream(seed, 0xFFFFFFFFu, stream_step).uniform(0);
            for (std::size_t path = 0; path < paths; ++path) {
                const NormalStream rng(seed, static_cast<std::uint32_t>(path), stream_step);
                std::uint32_t block = 0;
                std::size_t mode = p.initial_mode;
                double next_switch = e.t0() - std::log(rng.uniform(block++)) / rate;
                double acc = 0.0;
                for (std::size_t step = 0; step < steps; ++step) {
                    const double t = times[step];
                    if (next_switch <= t) {
                        const auto pick = static_cast<std::size_t>(rng.uniform(block++) * static_cast<double>(m - 1));
                        std::size_t to = std::min(pick, m - 2);
                        if (to >= mode) ++to;
                        acc -= cost_checked(p, mode, to, t, e.state(path, step), path, step);
                        mode = to;
                        next_switch = t - std::log(rng.uniform(block++)) / rate;
                    }
                    acc += 0.5 * dt * (psi[(mode * paths + path) * (steps + 1) + step] +
                                       psi[(mode * paths + path) * (steps + 1) + step + 1]);
                }
                profit[path] = acc;
                diff[path] = acc - opt[path];
            }
            rep.means[s] = mean_and_error(profit).mean;
            rep.paired_standard_errors[s] = mean_and_error(diff).standard_error;
        }
    });

    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_strategies; ++s) {
        const double gap = rep.means[s] - rep.optimal_mean;
        const double se = rep.paired_standard_errors[s];
        const double excess = se > 0.0 ? gap / se : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_excess = std::max(rep.worst_excess, excess);
        if (gap > 2.0 * se) ++rep.beaten_by;
    }
    if (n_strategies == 0) rep.worst_excess = 0.0;
    return rep;
}

}  // namespace switchbox
