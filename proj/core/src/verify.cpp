#include "switchbox/verify.hpp"

#include "switchbox/error.hpp"
#include "switchbox/fd_solver.hpp"
#include "switchbox/hash.hpp"
#include "util.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace switchbox {

namespace {

using detail::format_double;

double require_number(const YAML::Node& root, const std::string& section, const std::string& key) {
    const YAML::Node s = root[section];
    if (!s || !s.IsMap()) throw Error("thresholds: missing section '" + section + "'");
    const YAML::Node v = s[key];
    if (!v || !v.IsScalar()) throw Error("thresholds: missing key '" + section + "." + key + "'");
    try {
        return v.as<double>();
    } catch (const YAML::Exception&) {
        throw Error("thresholds: '" + section + "." + key + "' is not a number");
    }
}

std::size_t require_count(const YAML::Node& root, const std::string& section, const std::string& key) {
    const double v = require_number(root, section, key);
    if (!(v >= 0.0) || v != std::floor(v)) throw Error("thresholds: '" + section + "." + key + "' must be a whole number");
    return static_cast<std::size_t>(v);
}

std::string describe(const NodeLocation& loc) {
    std::ostringstream s;
    s << "mode " << loc.mode + 1 << " level " << loc.level << " node " << loc.node << " (t=" << format_double(loc.t)
      << ", x=" << detail::format_vector(loc.x) << ")";
    return s.str();
}

// value / allowance, with 0/0 counted as agreement.
double ratio(double value, double allowance) {
    if (allowance > 0.0) return value / allowance;
    return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

Check open_check(const std::string& name, std::string provenance) {
    Check c;
    c.name = name;
    c.provenance = std::move(provenance);
    return c;
}

Check skipped(const std::string& name, const std::string& why) {
    Check c;
    c.name = name;
    c.status = CheckStatus::skipped;
    c.measured = std::numeric_limits<double>::quiet_NaN();
    c.threshold = std::numeric_limits<double>::quiet_NaN();
    c.detail = why;
    return c;
}

void settle(Check& c, double measured, double threshold, bool pass) {
    c.measured = measured;
    c.threshold = threshold;
    c.status = pass ? CheckStatus::pass : CheckStatus::fail;
}

double fd_at_start(const ValueField& v, const SwitchingProblem& p, std::size_t mode) {
    return v.interpolate(mode, 0.0, p.x0);
}

std::string action_name(int action) {
    return action == kContinueAction ? std::string("continue") : "switch:" + std::to_string(action + 1);
}

Check closed_form(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::ClosedForm& th) {
    if (!in.expected) return skipped("closed_form", "no closed-form values declared");
    const ExpectedValues& ex = *in.expected;
    std::string prov;
    for (const std::string* label : {in.fd ? &in.fd_label : nullptr, in.mc ? &in.mc_label : nullptr,
                                     in.oracle ? &in.oracle_label : nullptr}) {
        if (!label) continue;
        prov += prov.empty() ? *label : "; " + *label;
    }
    Check c = open_check("closed_form", prov);
    std::ostringstream d;
    double worst = 0.0;
    bool policy_ok = true;
    for (std::size_t i = 0; i < ex.values.size() && i < p.modes; ++i) {
        d << (i ? "; " : "") << "mode " << i + 1 << " expected " << format_double(ex.values[i]);
        if (in.fd) {
            const double delta = std::fabs(fd_at_start(*in.fd, p, i) - ex.values[i]);
            worst = std::max(worst, ratio(delta, th.fd_abs));
            d << " fd |d|=" << format_double(delta);
        }
        if (in.mc) {
            const ModeEstimate e = in.mc->trace.back().values[i];
            const double delta = std::fabs(e.mean - ex.values[i]);
            worst = std::max(worst, ratio(delta, th.mc_se_multiple * e.standard_error + th.mc_abs));
            d << " mc |d|=" << format_double(delta) << " se=" << format_double(e.standard_error);
        }
        if (in.oracle && in.chain) {
            const double delta = std::fabs(in.oracle->value(i, 0, in.chain->root()) - ex.values[i]);
            worst = std::max(worst, ratio(delta, th.oracle_abs));
            d << " oracle |d|=" << format_double(delta);
        }
    }
    if (ex.policy_mode) {
        const std::size_t mode = *ex.policy_mode;
        const int want = ex.policy_continue ? static_cast<int>(kContinueAction) : static_cast<int>(*ex.policy_action);
        d << "; policy mode " << mode + 1 << " expected " << action_name(want);
        if (in.fd) {
            const PolicyField policy = extract_policy(*in.fd, p);
            const int got = policy.at(mode, 0, in.fd->grid().nearest_node(p.x0));
            policy_ok = policy_ok && got == want;
            d << " fd " << action_name(got);
        }
        if (in.oracle && in.chain) {
            const int got = in.oracle->action[in.oracle->index(mode, 0, in.chain->root())];
            policy_ok = policy_ok && got == want;
            d << " oracle " << action_name(got);
        }
    }
    d << "; measured is the worst |d| / allowance";
    c.detail = d.str();
    settle(c, worst, 1.0, worst <= 1.0 && policy_ok);
    return c;
}

Check oracle_equivalence(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::OracleEquivalence& th) {
    if (!in.oracle || !in.chain) return skipped("oracle_equivalence", "no lattice oracle (k != 1 or not requested)");
    std::string prov = in.oracle_label;
    if (in.fd) prov += "; " + in.fd_label;
    if (in.mc) prov += "; " + in.mc_label;
    Check c = open_check("oracle_equivalence", prov);
    const std::vector<double> root = root_values(*in.oracle, *in.chain);
    std::ostringstream d;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.modes; ++i) {
        d << (i ? "; " : "") << "mode " << i + 1 << " oracle " << format_double(root[i]);
        if (in.fd) {
            const double delta = std::fabs(fd_at_start(*in.fd, p, i) - root[i]);
            worst = std::max(worst, ratio(delta, th.fd_abs));
            d << " fd |d|=" << format_double(delta);
        }
        if (in.mc) {
            const ModeEstimate e = in.mc->trace.back().values[i];
            const double delta = std::fabs(e.mean - root[i]);
            worst = std::max(worst, ratio(delta, th.mc_se_multiple * e.standard_error + th.mc_abs));
            d << " mc |d|=" << format_double(delta) << " se=" << format_double(e.standard_error);
        }
        if (in.oracle_refined_root) {
            const double delta = std::fabs((*in.oracle_refined_root)[i] - root[i]);
            worst = std::max(worst, ratio(delta, th.level_doubling_abs));
            d << " doubling |d|=" << format_double(delta);
        }
    }
    d << "; measured is the worst |d| / allowance";
    c.detail = d.str();
    settle(c, worst, 1.0, worst <= 1.0);
    return c;
}

Check picard_monotone(const VerifyInputs& in, const Thresholds::Picard& th) {
    if (!in.mc) return skipped("picard_monotone", "no Monte Carlo iterates");
    Check c = open_check("picard_monotone", in.mc_label);
    const auto& trace = in.mc->trace;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_n = 0, worst_mode = 0;
    for (std::size_t n = 1; n < trace.size(); ++n) {
        for (std::size_t i = 0; i < trace[n].values.size(); ++i) {
            const ModeEstimate a = trace[n - 1].values[i];
            const ModeEstimate b = trace[n].values[i];
            const double excess = a.mean - b.mean - th.se_multiple * std::max(a.standard_error, b.standard_error);
            if (excess > worst) {
                worst = excess;
                worst_n = trace[n].n;
                worst_mode = i;
            }
        }
    }
    const std::size_t iterations = trace.empty() ? 0 : trace.back().n;
    double last_change = 0.0;
    if (trace.size() >= 2) {
        const auto& a = trace[trace.size() - 2].values;
        const auto& b = trace.back().values;
        for (std::size_t i = 0; i < a.size(); ++i) last_change = std::max(last_change, std::fabs(b[i].mean - a[i].mean));
    }
    const bool converged = in.mc->converged && last_change < th.tol && iterations <= th.max_iterations;
    if (trace.size() < 2) worst = 0.0;
    std::ostringstream d;
    d << "iterations " << iterations << " (cap " << in.mc_n_max << "), last change " << format_double(last_change)
      << ", converged " << (converged ? "yes" : "no");
    if (trace.size() >= 2) {
        d << "; tightest step: into iterate " << worst_n << " mode " << worst_mode + 1 << ", drop minus SE allowance "
          << format_double(worst);
    }
    c.detail = d.str();
    settle(c, std::max(0.0, worst), 0.0, worst <= 0.0 && converged);
    return c;
}

Check complementarity(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::Complementarity& th) {
    if (!in.fd) return skipped("complementarity_residual", "no finite-difference field");
    std::string prov = in.fd_label;
    if (in.fd_refined) prov += "; " + in.fd_refined_label;
    Check c = open_check("complementarity_residual", prov);
    const ResidualReport r = residuals(*in.fd, p, th.slack_tol);
    std::ostringstream d;
    d << "worst at " << describe(r.location) << "; " << r.continuation_nodes << " continuation, " << r.switching_nodes
      << " switching nodes";
    bool decreases = true;
    if (in.fd_refined) {
        const ResidualReport rr = residuals(*in.fd_refined, p, th.slack_tol);
        decreases = rr.max_abs < r.max_abs || std::max(rr.max_abs, r.max_abs) <= th.roundoff_floor;
        d << "; refined " << format_double(rr.max_abs) << " at " << describe(rr.location);
    }
    c.detail = d.str();
    settle(c, r.max_abs, th.max_abs, r.max_abs <= th.max_abs && decreases);
    return c;
}

Check obstacle_inequality(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::Obstacle& th) {
    if (!in.fd) return skipped("obstacle_inequality", "no finite-difference field");
    std::string prov = in.fd_label;
    if (in.fd_refined) prov += "; " + in.fd_refined_label;
    Check c = open_check("obstacle_inequality", prov);
    ObstacleReport worst = obstacle_check(*in.fd, p);
    if (in.fd_refined) {
        const ObstacleReport r = obstacle_check(*in.fd_refined, p);
        if (r.max_violation > worst.max_violation) worst = r;
    }
    c.detail = "obstacle - v peaks at " + format_double(worst.max_violation) + " at " + describe(worst.location);
    settle(c, std::max(0.0, worst.max_violation), th.tol, worst.max_violation <= th.tol);
    return c;
}

Check strategy_optimality(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::Strategy& th) {
    if (!in.fd || !in.sim || !in.sim_ensemble) return skipped("strategy_optimality", "no simulated strategy");
    Check c = open_check("strategy_optimality", in.sim_label + "; " + in.fd_label);
    const StrategySummary& s = in.sim->summary;
    const double target = fd_at_start(*in.fd, p, p.initial_mode);
    const double gap = std::fabs(s.mean_profit - target);
    const double allowance = th.se_multiple * s.standard_error + th.abs;

    const RandomStrategyReport random =
        random_strategy_check(*in.sim, *in.sim_ensemble, p, th.random_strategies, th.random_paths, in.random_seed);
    std::size_t beaten = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < random.means.size(); ++k) {
        const double excess = random.means[k] - random.optimal_mean;
        const double se = random.paired_standard_errors[k];
        if (excess > th.random_se_multiple * se) ++beaten;
        worst_excess = std::max(worst_excess, ratio(excess, se));
    }
    const std::size_t mismatches = accounting_mismatches(*in.sim, *in.sim_ensemble, p);

    std::ostringstream d;
    d << "mean " << format_double(s.mean_profit) << " se " << format_double(s.standard_error) << " vs v "
      << format_double(target) << "; random strategies beating the policy " << beaten << "/" << random.strategies
      << " on " << random.paths << " paths (worst excess " << format_double(worst_excess) << " SE)"
      << "; accounting mismatches " << mismatches << "; same-time reversals " << s.churn << "; truncated paths "
      << s.truncated;
    c.detail = d.str();
    settle(c, gap, allowance, gap <= allowance && beaten == 0 && mismatches == 0 && s.churn == 0);
    return c;
}

Check switch_tail(const VerifyInputs& in, const Thresholds::SwitchTail& th) {
    if (!in.sim) return skipped("switch_tail", "no simulated strategy");
    if (in.sim->traces.size() < kTailMinimumTraces) {
        return skipped("switch_tail", "needs at least " + std::to_string(kTailMinimumTraces) + " traces, have " + std::to_string(in.sim->traces.size()));
    }
    Check c = open_check("switch_tail", in.sim_label);
    const TailReport t = switch_statistics(in.sim->traces, th.relative_se_multiple);
    std::ostringstream d;
    d << "small-n max " << format_double(t.small_n_max) << ", fitted constant " << format_double(t.fitted_constant);
    for (const TailRow& row : t.rows) {
        if (row.n > 8) break;
        d << "; n=" << row.n << " nP=" << format_double(row.scaled);
    }
    d << "; measured is the worst ratio to the bound for n > 2";
    c.detail = d.str();
    settle(c, t.worst_ratio, 1.0, t.bounded);
    return c;
}

Check dpp(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::Dpp& th) {
    if (!in.fd || !in.sim_ensemble) return skipped("dpp", "no finite-difference field or simulation ensemble");
    Check c = open_check("dpp", in.fd_label + "; " + in.sim_label);
    double worst = 0.0;
    std::ostringstream d;
    for (std::size_t n : {std::size_t{1}, std::size_t{3}}) {
        const DppReport r = check_dpp(*in.fd, p, *in.sim_ensemble, n);
        const double delta = std::fabs(r.rhs - r.lhs);
        worst = std::max(worst, ratio(delta, th.se_multiple * r.standard_error + th.abs));
        d << (n == 1 ? "" : "; ") << "n=" << n << " lhs " << format_double(r.lhs) << " rhs " << format_double(r.rhs)
          << " se " << format_double(r.standard_error) << " reached " << format_double(r.reached);
    }
    d << "; measured is the worst |d| / allowance";
    c.detail = d.str();
    settle(c, worst, 1.0, worst <= 1.0);
    return c;
}

Check symmetry(const VerifyInputs& in, const Thresholds::Symmetry& th) {
    if (!in.symmetry) return skipped("symmetry", "no symmetry declared");
    if (!in.fd) return skipped("symmetry", "no finite-difference field");
    Check c = open_check("symmetry", in.fd_label);
    const ValueField& v = *in.fd;
    const Grid& g = v.grid();
    const std::size_t k = g.dimension();
    std::vector<double> x(k), mirror(k);
    double worst = 0.0;
    NodeLocation at;
    for (std::size_t i = 0; i < v.modes(); ++i) {
        const std::size_t j = in.symmetry->mode_map[i];
        for (std::size_t level = 0; level <= g.n_time; ++level) {
            const double t = g.time(level);
            for (std::size_t node = 0; node < g.node_count(); ++node) {
                g.position(node, x);
                for (std::size_t dim = 0; dim < k; ++dim) mirror[dim] = 2.0 * in.symmetry->center[dim] - x[dim];
                const double delta = std::fabs(v.at(i, level, node) - v.interpolate(j, t, mirror));
                if (delta > worst) {
                    worst = delta;
                    at = {i, level, node, t, x};
                }
            }
        }
    }
    c.detail = "worst at " + describe(at);
    settle(c, worst, th.max_abs, worst <= th.max_abs);
    return c;
}

Check determinism(const VerifyInputs& in) {
    if (!in.determinism) return skipped("determinism", "no repeated run");
    Check c = open_check("determinism", "artifacts recomputed with a different worker count");
    std::size_t mismatches = 0;
    std::string names;
    for (const auto& [name, pair] : in.determinism->fingerprints) {
        if (pair.first != pair.second) {
            ++mismatches;
            names += names.empty() ? name : ", " + name;
        }
    }
    c.detail = std::to_string(in.determinism->fingerprints.size()) + " artifacts compared bitwise";
    if (!names.empty()) c.detail += "; differing: " + names;
    settle(c, static_cast<double>(mismatches), 0.0, mismatches == 0);
    return c;
}

Check fd_vs_mc(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::FdVsMc& th) {
    if (!in.fd || !in.mc) return skipped("fd_vs_mc", "needs both a finite-difference field and Monte Carlo iterates");
    Check c = open_check("fd_vs_mc", in.fd_label + "; " + in.mc_label);
    double worst = 0.0;
    std::ostringstream d;
    for (std::size_t i = 0; i < p.modes; ++i) {
        const ModeEstimate e = in.mc->trace.back().values[i];
        const double f = fd_at_start(*in.fd, p, i);
        const double delta = std::fabs(e.mean - f);
        worst = std::max(worst, ratio(delta, th.se_multiple * e.standard_error + th.abs));
        d << (i ? "; " : "") << "mode " << i + 1 << " fd " << format_double(f) << " mc " << format_double(e.mean)
          << " se " << format_double(e.standard_error);
    }
    d << "; measured is the worst |d| / allowance";
    c.detail = d.str();
    settle(c, worst, 1.0, worst <= 1.0);
    return c;
}

Check upper_bound(const VerifyInputs& in, const Thresholds::UpperBound& th) {
    if (!in.mc) return skipped("upper_bound", "no Monte Carlo iterates");
    Check c = open_check("upper_bound", in.mc_label);
    const ModeEstimate ub = in.mc->upper_bound;
    double worst = -std::numeric_limits<double>::infinity();
    for (const ModeEstimate& e : in.mc->trace.back().values) {
        worst = std::max(worst, e.mean - ub.mean - th.se_multiple * std::max(e.standard_error, ub.standard_error));
    }
    c.detail = "E[int max|psi|] = " + format_double(ub.mean) + " se " + format_double(ub.standard_error) +
               "; margin " + format_double(-worst) + "; measured is the excess beyond the SE allowance";
    settle(c, std::max(0.0, worst), 0.0, worst <= 0.0);
    return c;
}

// Difference quotients of the coarse field over the inner half of the box and the
// first half of the horizon give local moduli; the refined field is then probed at
// (t0 + dt, x0 +- dx) and each change compared with safety * (Lt dt + Lx |dx|).
Check continuity_probe(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds::Continuity& th) {
    if (!in.fd) return skipped("continuity_probe", "no finite-difference field");
    const ValueField& coarse = *in.fd;
    const ValueField& fine = in.fd_refined ? *in.fd_refined : *in.fd;
    Check c = open_check("continuity_probe", in.fd_refined ? in.fd_label + "; " + in.fd_refined_label : in.fd_label);
    const Grid& g = coarse.grid();
    const std::size_t k = g.dimension();

    std::vector<double> center(k), half(k);
    for (std::size_t dim = 0; dim < k; ++dim) {
        center[dim] = 0.5 * (g.bounds.lo[dim] + g.bounds.hi[dim]);
        half[dim] = 0.5 * (g.bounds.hi[dim] - g.bounds.lo[dim]);
    }
    auto inner = [&](std::size_t node) {
        const auto idx = g.multi_index(node);
        for (std::size_t dim = 0; dim < k; ++dim) {
            if (idx[dim] + 1 >= g.n_space[dim]) return false;
            const double x = g.coordinate(dim, idx[dim]);
            if (std::fabs(x - center[dim]) > 0.5 * half[dim]) return false;
        }
        return true;
    };

    std::vector<double> lx(k, 0.0);
    double lt = 0.0;
    for (std::size_t i = 0; i < coarse.modes(); ++i) {
        for (std::size_t level = 0; level + 1 <= g.n_time && g.time(level) <= 0.5 * g.horizon; ++level) {
            for (std::size_t node = 0; node < g.node_count(); ++node) {
                if (!inner(node)) continue;
                const double v = coarse.at(i, level, node);
                lt = std::max(lt, std::fabs(coarse.at(i, level + 1, node) - v) / g.dt());
                const auto idx = g.multi_index(node);
                for (std::size_t dim = 0; dim < k; ++dim) {
                    const std::size_t next = dim == 0 ? g.node(idx[0] + 1, idx[1]) : g.node(idx[0], idx[1] + 1);
                    lx[dim] = std::max(lx[dim], std::fabs(coarse.at(i, level, next) - v) / g.dx(dim));
                }
            }
        }
    }

    const double t0 = 0.0;
    const double dt = th.probe_fraction * g.horizon;
    double worst = 0.0;
    std::ostringstream d;
    d << "Lt " << format_double(lt) << " Lx " << detail::format_vector(lx);
    for (std::size_t i = 0; i < fine.modes(); ++i) {
        const double base = fine.interpolate(i, t0, p.x0);
        for (std::size_t dim = 0; dim < k; ++dim) {
            const double dx = th.probe_fraction * 2.0 * half[dim];
            for (double sign : {-1.0, 1.0}) {
                std::vector<double> x = p.x0;
                x[dim] += sign * dx;
                const double change = std::fabs(fine.interpolate(i, t0 + dt, x) - base);
                worst = std::max(worst, ratio(change, th.safety * (lt * dt + lx[dim] * dx)));
            }
        }
    }
    d << "; measured is the worst change / modulus bound";
    c.detail = d.str();
    settle(c, worst, 1.0, worst <= 1.0);
    return c;
}

}  // namespace

Thresholds load_thresholds(const std::filesystem::path& file) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(file.string());
    } catch (const YAML::Exception& e) {
        throw Error("thresholds: cannot read " + file.string() + ": " + e.what());
    }
    if (!root["version"] || root["version"].as<int>() != 1) throw Error("thresholds: unsupported version in " + file.string());
    Thresholds t;
    t.closed_form = {require_number(root, "closed_form", "fd_abs"), require_number(root, "closed_form", "mc_se_multiple"),
                     require_number(root, "closed_form", "mc_abs"), require_number(root, "closed_form", "oracle_abs")};
    t.oracle_equivalence = {require_number(root, "oracle_equivalence", "fd_abs"),
                            require_number(root, "oracle_equivalence", "mc_se_multiple"),
                            require_number(root, "oracle_equivalence", "mc_abs"),
                            require_number(root, "oracle_equivalence", "level_doubling_abs")};
    t.picard = {require_number(root, "picard", "se_multiple"), require_number(root, "picard", "tol"),
                require_count(root, "picard", "max_iterations")};
    t.complementarity = {require_number(root, "complementarity", "max_abs"),
                         require_number(root, "complementarity", "slack_tol"),
                         require_number(root, "complementarity", "roundoff_floor")};
    t.obstacle = {require_number(root, "obstacle", "tol")};
    t.strategy = {require_number(root, "strategy", "se_multiple"), require_number(root, "strategy", "abs"),
                  require_number(root, "strategy", "random_se_multiple"),
                  require_count(root, "strategy", "random_strategies"), require_count(root, "strategy", "random_paths")};
    t.switch_tail = {require_number(root, "switch_tail", "relative_se_multiple")};
    t.dpp = {require_number(root, "dpp", "se_multiple"), require_number(root, "dpp", "abs")};
    t.symmetry = {require_number(root, "symmetry", "max_abs")};
    t.fd_vs_mc = {require_number(root, "fd_vs_mc", "se_multiple"), require_number(root, "fd_vs_mc", "abs")};
    t.upper_bound = {require_number(root, "upper_bound", "se_multiple")};
    t.continuity = {require_number(root, "continuity", "probe_fraction"), require_number(root, "continuity", "safety")};
    return t;
}

std::filesystem::path default_thresholds_path() {
    if (const char* env = std::getenv("SWITCHBOX_THRESHOLDS"); env && *env) return env;
#ifdef SWITCHBOX_SOURCE_THRESHOLDS
    if (std::filesystem::exists(SWITCHBOX_SOURCE_THRESHOLDS)) return SWITCHBOX_SOURCE_THRESHOLDS;
#endif
#ifdef SWITCHBOX_INSTALLED_THRESHOLDS
    return SWITCHBOX_INSTALLED_THRESHOLDS;
#else
    return "config/thresholds.yaml";
#endif
}

std::string code_version() {
#ifdef SWITCHBOX_VERSION
    return SWITCHBOX_VERSION;
#else
    return "unknown";
#endif
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skipped: return "skipped";
    }
    return "unknown";
}

bool Report::overall_pass() const {
    return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == CheckStatus::fail; });
}

const Check* Report::find(const std::string& name) const {
    for (const Check& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string Report::to_json() const {
    using Json = nlohmann::ordered_json;
    Json j;
    j["schema"] = "switchbox.report/1";
    j["problem"] = problem;
    j["problem_hash"] = hex64(problem_hash);
    j["code_version"] = code_version();
    j["run_config"] = run_config_json.empty() ? Json(nullptr) : Json::parse(run_config_json);
    Json list = Json::array();
    for (const Check& c : checks) {
        Json item;
        item["name"] = c.name;
        item["status"] = to_string(c.status);
        item["measured"] = c.measured;
        item["threshold"] = c.threshold;
        item["provenance"] = c.provenance;
        item["detail"] = c.detail;
        list.push_back(std::move(item));
    }
    j["checks"] = std::move(list);
    j["overall_pass"] = overall_pass();
    return j.dump(2) + "\n";
}

Report cross_check(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds& th) {
    if (in.fd && in.fd->problem_hash() != problem_hash(p)) throw Error("cross_check: fd field was built for another problem");
    if (in.fd_refined && in.fd_refined->problem_hash() != problem_hash(p)) {
        throw Error("cross_check: refined fd field was built for another problem");
    }
    Report r;
    r.problem = p.name;
    r.problem_hash = problem_hash(p);
    r.checks.push_back(closed_form(p, in, th.closed_form));
    r.checks.push_back(oracle_equivalence(p, in, th.oracle_equivalence));
    r.checks.push_back(picard_monotone(in, th.picard));
    r.checks.push_back(complementarity(p, in, th.complementarity));
    r.checks.push_back(obstacle_inequality(p, in, th.obstacle));
    r.checks.push_back(strategy_optimality(p, in, th.strategy));
    r.checks.push_back(switch_tail(in, th.switch_tail));
    r.checks.push_back(dpp(p, in, th.dpp));
    r.checks.push_back(symmetry(in, th.symmetry));
    r.checks.push_back(determinism(in));
    r.checks.push_back(fd_vs_mc(p, in, th.fd_vs_mc));
    r.checks.push_back(upper_bound(in, th.upper_bound));
    r.checks.push_back(continuity_probe(p, in, th.continuity));
    return r;
}

}  // namespace switchbox
