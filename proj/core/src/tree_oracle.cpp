#include "switchbox/tree_oracle.hpp"

#include "switchbox/error.hpp"
#include "switchbox/grid.hpp"
#include "switchbox/hash.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace switchbox {

namespace {

double variance_at(const SwitchingProblem& p, double t, double x) {
    std::vector<double> a(1);
    const double xs[1] = {x};
    p.diffusion.covariance_at(t, xs, a);
    return a[0];
}

double drift_at(const SwitchingProblem& p, double t, double x) {
    std::vector<double> b(1);
    const double xs[1] = {x};
    p.diffusion.drift_at(t, xs, b);
    return b[0];
}

bool uses_time(const SwitchingProblem& p) {
    for (const auto& e : p.diffusion.drift) {
        if (e.uses_time()) return true;
    }
    for (const auto& e : p.diffusion.volatility) {
        if (e.uses_time()) return true;
    }
    return false;
}

// Value of a slice at node offset `node` (may be one step outside), extrapolated linearly.
double extended(const double* slice, std::size_t count, long node) {
    if (node < 0) return 2.0 * slice[0] - slice[1];
    if (static_cast<std::size_t>(node) >= count) return 2.0 * slice[count - 1] - slice[count - 2];
    return slice[node];
}

double expectation(const ChainApprox& c, const double* next, std::size_t level, std::size_t node) {
    const double* pr = c.probs(level, node);
    const long j = static_cast<long>(node);
    const std::size_t n = c.node_count();
    return pr[0] * extended(next, n, j - 1) + pr[1] * next[node] + pr[2] * extended(next, n, j + 1);
}

}  // namespace

ChainApprox build_chain(const SwitchingProblem& p, std::size_t n_levels) {
    if (p.dimension() != 1) throw SolverError("tree oracle supports k = 1 only (got k = " + std::to_string(p.dimension()) + ")");
    if (n_levels < 1) throw SolverError("tree oracle needs at least one level");
    const Box box = default_fd_box(p);
    const double lo = box.lo[0];
    const double hi = box.hi[0];

    ChainApprox c;
    c.x0 = p.x0[0];
    c.horizon = p.horizon;
    c.n_levels = n_levels;
    c.dt = p.horizon / static_cast<double>(n_levels);
    c.time_dependent = uses_time(p);

    // largest volatility over a sample of the box and the time grid
    double var_max = 0.0;
    const std::size_t samples = 401;
    const std::size_t time_samples = c.time_dependent ? 21 : 1;
    for (std::size_t a = 0; a < time_samples; ++a) {
        const double t = time_samples == 1 ? 0.0 : p.horizon * static_cast<double>(a) / static_cast<double>(time_samples - 1);
        for (std::size_t s = 0; s < samples; ++s) {
            const double x = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(samples - 1);
            var_max = std::max(var_max, variance_at(p, t, x));
        }
    }
    c.dx = var_max > 0.0 ? std::sqrt(3.0 * var_max * c.dt) : (hi - lo) / 100.0;
    c.j_lo = -static_cast<long>(std::floor((c.x0 - lo) / c.dx + 1e-9));
    c.j_hi = static_cast<long>(std::floor((hi - c.x0) / c.dx + 1e-9));
    c.j_lo = std::max(c.j_lo, -static_cast<long>(n_levels));
    c.j_hi = std::min(c.j_hi, static_cast<long>(n_levels));
    if (c.j_hi - c.j_lo < 2) {
        c.j_lo = std::min(c.j_lo, -1L);
        c.j_hi = std::max(c.j_hi, 1L);
    }

    const std::size_t rows = c.time_dependent ? n_levels : 1;
    const std::size_t nodes = c.node_count();
    c.probabilities.resize(rows * nodes * 3);
    for (std::size_t r = 0; r < rows; ++r) {
        const double t = c.time(r);
        for (std::size_t n = 0; n < nodes; ++n) {
            const double x = c.x(n);
            double mu = 0.0, var = 0.0;
            try {
                mu = drift_at(p, t, x) * c.dt;
                var = variance_at(p, t, x) * c.dt;
            } catch (const DomainError& e) {
                throw SolverError("coefficient domain error at lattice node x=" + detail::format_double(x) + ": " + e.what());
            }
            const double second = (var + mu * mu) / (c.dx * c.dx);
            const double pu = 0.5 * second + 0.5 * mu / c.dx;
            const double pd = 0.5 * second - 0.5 * mu / c.dx;
            const double pm = 1.0 - second;
            for (double q : {pu, pm, pd}) {
                if (!(q >= -1e-14 && q <= 1.0 + 1e-14)) {
                    throw SolverError("moment matching infeasible at lattice node " + std::to_string(n) + " (x=" +
                                      detail::format_double(x) + ", t=" + detail::format_double(t) + "): probabilities " +
                                      detail::format_double(pd) + ", " + detail::format_double(pm) + ", " +
                                      detail::format_double(pu));
                }
            }
            double* out = c.probabilities.data() + (r * nodes + n) * 3;
            out[0] = std::clamp(pd, 0.0, 1.0);
            out[1] = std::clamp(pm, 0.0, 1.0);
            out[2] = std::clamp(pu, 0.0, 1.0);
        }
    }
    return c;
}

OracleValue solve_dp(const ChainApprox& chain, const SwitchingProblem& p) {
    p.check_structure();
    const std::size_t m = p.modes;
    const std::size_t nodes = chain.node_count();
    OracleValue out;
    out.modes = m;
    out.n_levels = chain.n_levels;
    out.nodes = nodes;
    out.w.assign(m * (chain.n_levels + 1) * nodes, 0.0);
    out.action.assign(out.w.size(), kContinueAction);

    std::vector<double> cont(m), cur(m), upd(m);
    std::vector<double> costs(m * m), xs(1);
    for (std::size_t level = chain.n_levels; level-- > 0;) {
        const double t = chain.time(level);
        for (std::size_t n = 0; n < nodes; ++n) {
            xs[0] = chain.x(n);
            for (std::size_t i = 0; i < m; ++i) {
                const double* next = out.w.data() + out.index(i, level + 1, 0);
                cont[i] = p.psi_at(i, t, xs) * chain.dt + expectation(chain, next, level, n);
                for (std::size_t j = 0; j < m; ++j) costs[i * m + j] = i == j ? 0.0 : p.cost_at(i, j, t, xs);
            }
            cur = cont;
            std::size_t changing_passes = 0;
            for (;;) {
                bool changed = false;
                for (std::size_t i = 0; i < m; ++i) {
                    double best = cont[i];
                    for (std::size_t j = 0; j < m; ++j) {
                        if (j != i) best = std::max(best, -costs[i * m + j] + cur[j]);
                    }
                    upd[i] = best;
                    changed = changed || best != cur[i];
                }
                if (!changed) break;
                cur = upd;
                if (++changing_passes > m - 1) {
                    throw std::logic_error("same-level switch resolution exceeded m - 1 passes at level " +
                                           std::to_string(level) + ", node " + std::to_string(n));
                }
            }
            out.max_switch_passes = std::max(out.max_switch_passes, changing_passes);
            for (std::size_t i = 0; i < m; ++i) {
                out.w[out.index(i, level, n)] = cur[i];
                if (cur[i] > cont[i]) {
                    for (std::size_t j = 0; j < m; ++j) {
                        if (j != i && -costs[i * m + j] + cur[j] == cur[i]) {
                            out.action[out.index(i, level, n)] = static_cast<int>(j);
                            break;
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<double> root_values(const OracleValue& w, const ChainApprox& chain) {
    std::vector<double> out(w.modes);
    for (std::size_t i = 0; i < w.modes; ++i) out[i] = w.value(i, 0, chain.root());
    return out;
}

double solve_stopping(const ChainApprox& chain, const SwitchingProblem& p, std::size_t mode) {
    const std::size_t nodes = chain.node_count();
    std::vector<double> next(nodes, 0.0), cur(nodes);
    std::vector<double> xs(1);
    for (std::size_t level = chain.n_levels; level-- > 0;) {
        const double t = chain.time(level);
        for (std::size_t n = 0; n < nodes; ++n) {
            xs[0] = chain.x(n);
            cur[n] = std::max(0.0, p.psi_at(mode, t, xs) * chain.dt + expectation(chain, next.data(), level, n));
        }
        std::swap(cur, next);
    }
    return next[chain.root()];
}

void write_golden(const GoldenRecord& g, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << "# tree oracle root values\n";
    out << "problem_hash " << hex64(g.problem_hash) << '\n';
    out << "n_levels " << g.n_levels << '\n';
    char buf[64];
    for (std::size_t i = 0; i < g.root.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", g.root[i]);
        out << "mode " << i + 1 << ' ' << buf << '\n';
    }
}

GoldenRecord read_golden(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    GoldenRecord g;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "problem_hash") {
            std::string hex;
            ss >> hex;
            g.problem_hash = std::stoull(hex, nullptr, 16);
        } else if (key == "n_levels") {
            ss >> g.n_levels;
        } else if (key == "mode") {
            std::size_t mode = 0;
            double v = 0.0;
            ss >> mode >> v;
            if (mode != g.root.size() + 1) throw Error(file.string() + ": modes out of order");
            g.root.push_back(v);
        } else {
            throw Error(file.string() + ": unknown key '" + key + "'");
        }
        if (ss.fail()) throw Error(file.string() + ": malformed line '" + line + "'");
    }
    return g;
}

}  // namespace switchbox
