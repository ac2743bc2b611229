#include "switchbox/picard_mc.hpp"

#include "switchbox/error.hpp"
#include "switchbox/hash.hpp"
#include "switchbox/parallel.hpp"
#include "switchbox/regression.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace switchbox {

PathTables::PathTables(const SwitchingProblem& p, const PathEnsemble& e)
    : modes_(p.modes), paths_(e.n_paths()), steps_(e.n_steps()) {
    const std::size_t per_path = steps_ + 1;
    psi_.assign(modes_ * paths_ * per_path, 0.0);
    cost_.assign(modes_ * modes_ * paths_ * per_path, 0.0);
    const auto& times = e.times();
    std::vector<char> nonzero(paths_, 0);
    parallel_for(paths_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            for (std::size_t step = 0; step <= steps_; ++step) {
                const auto x = e.state(path, step);
                const double t = times[step];
                try {
                    for (std::size_t i = 0; i < modes_; ++i) {
                        const double v = p.psi_at(i, t, x);
                        psi_[(i * paths_ + path) * per_path + step] = v;
                        if (v != 0.0) nonzero[path] = 1;
                        for (std::size_t j = 0; j < modes_; ++j) {
                            if (j != i) cost_[((i * modes_ + j) * paths_ + path) * per_path + step] = p.cost_at(i, j, t, x);
                        }
                    }
                } catch (const DomainError& err) {
                    throw SolverError("coefficient domain error on path " + std::to_string(path) + " at step " +
                                      std::to_string(step) + ": " + err.what());
                }
            }
        }
    });
    psi_vanishes_ = std::none_of(nonzero.begin(), nonzero.end(), [](char c) { return c != 0; });
}

ModeEstimate SnellIterate::estimate_at_t0(std::size_t mode) const {
    double sum = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) sum += value(mode, p, 0);
    const double mean = sum / static_cast<double>(n_paths);
    double ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        const double d = value(mode, p, 0) - mean;
        ss += d * d;
    }
    const double var = n_paths > 1 ? ss / static_cast<double>(n_paths - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n_paths))};
}

std::uint64_t SnellIterate::fingerprint() const {
    Fnv1a h;
    h.update(static_cast<std::uint64_t>(n));
    h.update(ensemble_fingerprint);
    h.update(std::span<const double>(y));
    h.update(std::span<const double>(yhat));
    return h.digest();
}

void SnellIterate::write_paths_csv(const std::filesystem::path& file, std::string_view preamble) const {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << preamble;
    out << "path,step,mode,y,yhat\n";
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t s = 0; s <= n_steps; ++s) {
            for (std::size_t i = 0; i < modes; ++i) {
                out << p << ',' << s << ',' << i + 1 << ',' << detail::format_double(y[index(i, p, s)]) << ','
                    << detail::format_double(yhat[index(i, p, s)]) << '\n';
            }
        }
    }
}

namespace {

// One backward Longstaff-Schwartz sweep for all modes. Stage 0 when prev is null.
SnellIterate backward_sweep(const PathEnsemble& e, const PathTables& tab, std::size_t degree, const SnellIterate* prev) {
    const std::size_t m = tab.modes();
    const std::size_t n_paths = e.n_paths();
    const std::size_t n_steps = e.n_steps();
    const std::size_t k = e.dimension();
    const double dt = e.dt();

    SnellIterate it;
    it.n = prev ? prev->n + 1 : 0;
    it.modes = m;
    it.n_paths = n_paths;
    it.n_steps = n_steps;
    it.degree = degree;
    it.ensemble_fingerprint = e.fingerprint();
    it.y.assign(m * n_paths * (n_steps + 1), 0.0);
    it.yhat.assign(it.y.size(), 0.0);

    std::vector<double> states(n_paths * k);
    std::vector<double> targets(n_paths * m);
    for (std::size_t step = n_steps; step-- > 0;) {
        parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto x = e.state(p, step);
                std::copy(x.begin(), x.end(), states.begin() + static_cast<std::ptrdiff_t>(p * k));
                for (std::size_t i = 0; i < m; ++i) {
                    targets[p * m + i] = tab.increment(i, p, step, dt) + it.y[it.index(i, p, step + 1)];
                }
            }
        });
        const SliceRegression reg(states, n_paths, k, degree);
        if (reg.reduced()) ++it.rank_reductions;
        const std::vector<double> continuation = reg.fit_predict(targets, m);

        parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                for (std::size_t i = 0; i < m; ++i) {
                    double obstacle = 0.0;
                    double realised = 0.0;
                    if (prev) {
                        obstacle = -std::numeric_limits<double>::infinity();
                        for (std::size_t j = 0; j < m; ++j) {
                            if (j == i) continue;
                            const double o = -tab.cost(i, j, p, step) + prev->yhat[prev->index(j, p, step)];
                            if (o > obstacle) {
                                obstacle = o;
                                realised = -tab.cost(i, j, p, step) + prev->y[prev->index(j, p, step)];
                            }
                        }
                    }
                    const double c = continuation[p * m + i];
                    const std::size_t idx = it.index(i, p, step);
                    it.y[idx] = obstacle > c ? realised : targets[p * m + i];
                    it.yhat[idx] = std::max(obstacle, c);
                }
            }
        });
    }
    return it;
}

void check_same_ensemble(const SnellIterate& prev, const PathEnsemble& e) {
    if (prev.n_paths != e.n_paths() || prev.n_steps != e.n_steps() || prev.ensemble_fingerprint != e.fingerprint()) {
        throw SolverError("picard_step: previous iterate was built on a different ensemble");
    }
}

}  // namespace

SnellIterate snell_stage0(const PathEnsemble& e, const SwitchingProblem& p, std::size_t degree) {
    return snell_stage0(e, PathTables(p, e), degree);
}

SnellIterate snell_stage0(const PathEnsemble& e, const PathTables& tables, std::size_t degree) {
    return backward_sweep(e, tables, degree, nullptr);
}

SnellIterate picard_step(const SnellIterate& prev, const PathEnsemble& e, const SwitchingProblem& p) {
    check_same_ensemble(prev, e);
    return backward_sweep(e, PathTables(p, e), prev.degree, &prev);
}

SnellIterate picard_step(const SnellIterate& prev, const PathEnsemble& e, const PathTables& tables) {
    check_same_ensemble(prev, e);
    return backward_sweep(e, tables, prev.degree, &prev);
}

McResult solve_mc(const SwitchingProblem& p, const PathEnsemble& e, const McOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("solve_mc: tol must be positive");
    if (options.n_max < 1) throw std::invalid_argument("solve_mc: n_max must be at least 1");
    p.check_structure();
    const PathTables tables(p, e);
    const std::size_t m = p.modes;

    auto record = [&](McResult& r, const SnellIterate& it) {
        McTraceEntry entry;
        entry.n = it.n;
        for (std::size_t i = 0; i < m; ++i) entry.values.push_back(it.estimate_at_t0(i));
        r.trace.push_back(std::move(entry));
    };

    McResult result;
    {
        // running bound: max_i |psi_i| integrated along each path
        const double dt = e.dt();
        std::vector<double> per_path(e.n_paths(), 0.0);
        for (std::size_t path = 0; path < e.n_paths(); ++path) {
            double acc = 0.0;
            for (std::size_t s = 0; s < e.n_steps(); ++s) {
                double a = 0.0, b = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    a = std::max(a, std::fabs(tables.psi(i, path, s)));
                    b = std::max(b, std::fabs(tables.psi(i, path, s + 1)));
                }
                acc += 0.5 * dt * (a + b);
            }
            per_path[path] = acc;
        }
        double sum = 0.0;
        for (double v : per_path) sum += v;
        const double mean = sum / static_cast<double>(per_path.size());
        double ss = 0.0;
        for (double v : per_path) ss += (v - mean) * (v - mean);
        const double n = static_cast<double>(per_path.size());
        result.upper_bound = {mean, per_path.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
    }

    SnellIterate current = snell_stage0(e, tables, options.degree);
    record(result, current);
    std::size_t reductions = current.rank_reductions;
    if (tables.psi_vanishes()) {
        result.converged = true;
    } else {
        for (std::size_t n = 1; n <= options.n_max; ++n) {
            SnellIterate next = picard_step(current, e, tables);
            reductions += next.rank_reductions;
            record(result, next);
            current = std::move(next);
            const auto& a = result.trace[result.trace.size() - 2].values;
            const auto& b = result.trace.back().values;
            double change = 0.0;
            for (std::size_t i = 0; i < m; ++i) change = std::max(change, std::fabs(b[i].mean - a[i].mean));
            if (change < options.tol) {
                result.converged = true;
                break;
            }
        }
    }
    if (reductions > 0) {
        result.warnings.push_back("regression degree lowered for rank deficiency on " + std::to_string(reductions) +
                                  " slice fit(s)");
    }
    result.last = std::move(current);
    return result;
}

void write_trace_csv(const std::vector<McTraceEntry>& trace, const std::filesystem::path& file, std::string_view preamble) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << preamble;
    out << "iteration,mode,mean,standard_error\n";
    for (const auto& entry : trace) {
        for (std::size_t i = 0; i < entry.values.size(); ++i) {
            out << entry.n << ',' << i + 1 << ',' << detail::format_double(entry.values[i].mean) << ','
                << detail::format_double(entry.values[i].standard_error) << '\n';
        }
    }
}

}  // namespace switchbox
