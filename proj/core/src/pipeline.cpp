#include "switchbox/pipeline.hpp"

#include "switchbox/error.hpp"
#include "switchbox/fd_solver.hpp"
#include "switchbox/hash.hpp"
#include "switchbox/parallel.hpp"

#include <json.hpp>

#include <fstream>

namespace switchbox {

namespace {

using Json = nlohmann::ordered_json;

Json header(const SwitchingProblem& p, const RunConfig& c, const std::string& kind) {
    Json j;
    j["schema"] = "switchbox." + kind + "/1";
    j["problem"] = p.name;
    j["problem_hash"] = hex64(problem_hash(p));
    j["code_version"] = code_version();
    j["run_config"] = Json::parse(c.to_json());
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json estimates(const std::vector<ModeEstimate>& values) {
    Json list = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        list.push_back({{"mode", i + 1}, {"mean", values[i].mean}, {"standard_error", values[i].standard_error}});
    }
    return list;
}

std::uint64_t profit_fingerprint(const StrategyRun& run) {
    Fnv1a h;
    for (const StrategyTrace& t : run.traces) {
        h.update(t.profit);
        h.update(static_cast<std::uint64_t>(t.switches.size()));
    }
    return h.digest();
}

struct Fingerprints {
    std::uint64_t fd = 0;
    std::uint64_t mc_ensemble = 0;
    std::uint64_t stage0 = 0;
    std::uint64_t stage1 = 0;
    std::uint64_t sim_ensemble = 0;
    std::uint64_t strategy = 0;
};

// Short recomputation of the thread-sensitive stages.
Fingerprints fingerprint_run(const SwitchingProblem& p, RunConfig c) {
    c.out_dir.reset();  // never read the FD cache here
    Fingerprints f;
    const ValueField fd = run_fd(p, c);
    f.fd = fd.fingerprint();
    const PathEnsemble mc = run_mc_ensemble(p, c);
    f.mc_ensemble = mc.fingerprint();
    const PathTables tables(p, mc);
    const SnellIterate s0 = snell_stage0(mc, tables, c.degree);
    f.stage0 = s0.fingerprint();
    f.stage1 = picard_step(s0, mc, tables).fingerprint();
    const PathEnsemble sim = run_sim_ensemble(p, c);
    f.sim_ensemble = sim.fingerprint();
    f.strategy = profit_fingerprint(simulate_strategy(extract_policy(fd, p), sim, p));
    return f;
}

// Restores the previous worker override on scope exit.
class ThreadLimit {
public:
    explicit ThreadLimit(std::size_t n) : previous_(thread_count()) { set_thread_limit(n); }
    ~ThreadLimit() { set_thread_limit(previous_); }
    ThreadLimit(const ThreadLimit&) = delete;
    ThreadLimit& operator=(const ThreadLimit&) = delete;

private:
    std::size_t previous_;
};

}  // namespace

std::string RunConfig::to_json() const {
    Json j;
    j["command"] = command;
    j["problem"] = problem;
    j["grid"] = grid;
    j["steps"] = fd_steps;
    j["scheme"] = switchbox::to_string(scheme);
    j["paths"] = mc_paths;
    j["mc_steps"] = mc_steps;
    j["degree"] = degree;
    j["sim_paths"] = sim_paths;
    j["sim_steps"] = sim_steps;
    j["oracle_levels"] = oracle_levels;
    j["seed"] = seed;
    j["tol"] = tol;
    j["picard_max"] = picard_max;
    return j.dump();
}

RunConfig make_run_config(const std::string& command, const std::string& problem, const SolverDefaults& d) {
    RunConfig c;
    c.command = command;
    c.problem = problem;
    c.grid = d.grid;
    c.fd_steps = d.fd_steps;
    c.scheme = d.scheme;
    c.mc_paths = d.mc_paths;
    c.mc_steps = d.mc_steps;
    c.degree = d.degree;
    c.sim_paths = d.sim_paths;
    c.sim_steps = d.sim_steps == 0 ? d.fd_steps : d.sim_steps;
    c.oracle_levels = d.oracle_levels;
    c.tol = d.tol;
    c.picard_max = d.picard_max;
    return c;
}

std::string csv_preamble(const SwitchingProblem& p, const RunConfig& c) {
    return "# problem_hash " + hex64(problem_hash(p)) + "\n# run_config " + c.to_json() + "\n# code_version " +
           code_version() + "\n";
}

Grid run_grid(const SwitchingProblem& p, const RunConfig& c, std::size_t refine) {
    std::vector<std::size_t> n = c.grid;
    if (n.size() == 1 && p.dimension() == 2) n.push_back(n[0]);
    if (n.size() != p.dimension()) {
        throw std::invalid_argument("--grid needs " + std::to_string(p.dimension()) + " count(s) for this problem");
    }
    for (auto& count : n) count = (count - 1) * refine + 1;
    return make_grid(p, n, c.fd_steps * refine);
}

ValueField run_fd(const SwitchingProblem& p, const RunConfig& c, std::size_t refine) {
    const Grid grid = run_grid(p, c, refine);
    std::optional<std::filesystem::path> cache;
    if (c.out_dir) {
        Fnv1a h;
        h.update(fd_cache_key(p, grid, c.scheme));
        h.update(code_version());
        cache = *c.out_dir / ("fd_cache_" + hex64(h.digest()) + ".bin");
        if (std::filesystem::exists(*cache)) {
            try {
                ValueField v = ValueField::load_binary(*cache);
                if (v.problem_hash() == problem_hash(p)) return v;
            } catch (const Error&) {
                // unreadable cache: solve again and overwrite it
            }
        }
    }
    FdOptions options;
    options.scheme = c.scheme;
    ValueField v = solve_fd(p, grid, options);
    if (cache) {
        std::filesystem::create_directories(*c.out_dir);
        v.save_binary(*cache);
    }
    return v;
}

PathEnsemble run_mc_ensemble(const SwitchingProblem& p, const RunConfig& c) {
    return simulate(p, 0.0, p.x0, c.mc_paths, c.mc_steps, c.seed);
}

McResult run_mc(const SwitchingProblem& p, const RunConfig& c, const PathEnsemble& e) {
    McOptions options;
    options.tol = c.tol;
    options.n_max = c.picard_max;
    options.degree = c.degree;
    return solve_mc(p, e, options);
}

PathEnsemble run_sim_ensemble(const SwitchingProblem& p, const RunConfig& c) {
    return simulate(p, 0.0, p.x0, c.sim_paths, c.sim_steps, c.seed + 1);
}

std::optional<OracleRun> run_oracle(const SwitchingProblem& p, std::size_t n_levels) {
    if (p.dimension() != 1) return std::nullopt;
    OracleRun run;
    run.chain = build_chain(p, n_levels);
    run.value = solve_dp(run.chain, p);
    return run;
}

CompareRun run_compare(const ProblemFile& f, const RunConfig& c, const Thresholds& th) {
    const SwitchingProblem& p = f.problem;
    CompareRun run;
    run.fd = run_fd(p, c);
    run.fd_refined = run_fd(p, c, 2);
    run.mc_ensemble = run_mc_ensemble(p, c);
    run.mc = run_mc(p, c, run.mc_ensemble);
    run.oracle = run_oracle(p, c.oracle_levels);
    if (run.oracle) {
        const auto refined = run_oracle(p, 2 * c.oracle_levels);
        run.oracle_refined_root = root_values(refined->value, refined->chain);
    }
    run.sim_ensemble = run_sim_ensemble(p, c);
    run.sim = simulate_strategy(extract_policy(run.fd, p), run.sim_ensemble, p);

    const std::size_t threads_a = thread_count();
    const std::size_t threads_b = threads_a == 1 ? 2 : 1;
    const PathTables tables(p, run.mc_ensemble);
    const SnellIterate s0 = snell_stage0(run.mc_ensemble, tables, c.degree);
    Fingerprints a;
    a.fd = run.fd.fingerprint();
    a.mc_ensemble = run.mc_ensemble.fingerprint();
    a.stage0 = s0.fingerprint();
    a.stage1 = picard_step(s0, run.mc_ensemble, tables).fingerprint();
    a.sim_ensemble = run.sim_ensemble.fingerprint();
    a.strategy = profit_fingerprint(run.sim);
    Fingerprints b;
    {
        ThreadLimit limit(threads_b);
        b = fingerprint_run(p, c);
    }
    run.determinism.threads_a = threads_a;
    run.determinism.threads_b = threads_b;
    run.determinism.fingerprints = {
        {"fd_field", {a.fd, b.fd}},
        {"mc_ensemble", {a.mc_ensemble, b.mc_ensemble}},
        {"snell_iterate_0", {a.stage0, b.stage0}},
        {"snell_iterate_1", {a.stage1, b.stage1}},
        {"sim_ensemble", {a.sim_ensemble, b.sim_ensemble}},
        {"strategy_profits", {a.strategy, b.strategy}},
    };

    VerifyInputs in;
    if (f.expected) in.expected = &*f.expected;
    if (f.symmetry) in.symmetry = &*f.symmetry;
    in.fd = &run.fd;
    in.fd_refined = &run.fd_refined;
    in.mc = &run.mc;
    in.mc_n_max = c.picard_max;
    if (run.oracle) {
        in.chain = &run.oracle->chain;
        in.oracle = &run.oracle->value;
        in.oracle_refined_root = run.oracle_refined_root;
    }
    in.sim_ensemble = &run.sim_ensemble;
    in.sim = &run.sim;
    in.random_seed = c.seed + 2;
    in.determinism = &run.determinism;

    const Grid& g = run.fd.grid();
    const Grid& gr = run.fd_refined.grid();
    auto grid_label = [&](const Grid& grid) {
        std::string s = "fd " + switchbox::to_string(c.scheme) + " ";
        for (std::size_t d = 0; d < grid.dimension(); ++d) s += std::to_string(grid.n_space[d]) + "x";
        return s + std::to_string(grid.n_time);
    };
    in.fd_label = grid_label(g);
    in.fd_refined_label = grid_label(gr);
    in.mc_label = "mc " + std::to_string(c.mc_paths) + " paths x " + std::to_string(c.mc_steps) + " steps, degree " +
                  std::to_string(c.degree) + ", seed " + std::to_string(c.seed);
    in.oracle_label = "oracle " + std::to_string(c.oracle_levels) + " levels";
    if (run.oracle_refined_root) in.oracle_label += " (and " + std::to_string(2 * c.oracle_levels) + ")";
    in.sim_label = "simulation " + std::to_string(c.sim_paths) + " paths x " + std::to_string(c.sim_steps) +
                   " steps, seed " + std::to_string(c.seed + 1);

    run.report = cross_check(p, in, th);
    run.report.run_config_json = c.to_json();
    return run;
}

std::string validation_json(const ProblemFile& f, const RunConfig& c, const ValidationReport& r) {
    Json j = header(f.problem, c, "validation");
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["min_cost"] = r.min_cost;
    j["implied_growth_constant"] = r.implied_growth_constant;
    j["implied_diffusion_constant"] = r.implied_diffusion_constant;
    j["implied_lipschitz_constant"] = r.implied_lipschitz_constant;
    j["min_covariance_eigenvalue"] = r.min_covariance_eigenvalue;
    Json list = Json::array();
    for (const Violation& v : r.violations) {
        list.push_back({{"kind", v.kind}, {"message", v.message}, {"t", v.t}, {"x", v.x}, {"measured", v.measured},
                        {"bound", v.bound}});
    }
    j["violations"] = std::move(list);
    j["ok"] = r.ok();
    return dump(j);
}

std::string fd_summary_json(const ProblemFile& f, const RunConfig& c, const ValueField& v) {
    const SwitchingProblem& p = f.problem;
    Json j = header(p, c, "fd");
    Json values = Json::array();
    for (std::size_t i = 0; i < v.modes(); ++i) values.push_back({{"mode", i + 1}, {"value", v.interpolate(i, 0.0, p.x0)}});
    j["values_at_start"] = std::move(values);
    j["fingerprint"] = hex64(v.fingerprint());
    j["max_projection_passes"] = v.max_projection_passes;
    j["max_policy_iterations"] = v.max_policy_iterations;
    j["warnings"] = v.warnings;
    return dump(j);
}

std::string mc_summary_json(const ProblemFile& f, const RunConfig& c, const McResult& r) {
    Json j = header(f.problem, c, "mc");
    j["iterations"] = r.last.n;
    j["converged"] = r.converged;
    j["values_at_start"] = estimates(r.trace.back().values);
    j["upper_bound"] = {{"mean", r.upper_bound.mean}, {"standard_error", r.upper_bound.standard_error}};
    j["fingerprint"] = hex64(r.last.fingerprint());
    j["warnings"] = r.warnings;
    return dump(j);
}

std::string oracle_summary_json(const ProblemFile& f, const RunConfig& c, const OracleRun& o) {
    Json j = header(f.problem, c, "oracle");
    j["levels"] = o.chain.n_levels;
    j["dx"] = o.chain.dx;
    j["nodes"] = o.chain.node_count();
    Json values = Json::array();
    const std::vector<double> root = root_values(o.value, o.chain);
    for (std::size_t i = 0; i < root.size(); ++i) {
        const int action = o.value.action[o.value.index(i, 0, o.chain.root())];
        values.push_back({{"mode", i + 1},
                          {"value", root[i]},
                          {"action", action == kContinueAction ? std::string("continue")
                                                               : "switch:" + std::to_string(action + 1)}});
    }
    j["values_at_start"] = std::move(values);
    j["max_switch_passes"] = o.value.max_switch_passes;
    return dump(j);
}

std::string simulate_summary_json(const ProblemFile& f, const RunConfig& c, const StrategyRun& r, double fd_value) {
    Json j = header(f.problem, c, "simulate");
    const StrategySummary& s = r.summary;
    j["paths"] = s.n_paths;
    j["mean_profit"] = s.mean_profit;
    j["standard_error"] = s.standard_error;
    j["truncated"] = s.truncated;
    j["total_switches"] = s.total_switches;
    j["max_switches"] = s.max_switches;
    j["churn"] = s.churn;
    j["high_low"] = {{"high", fd_value}, {"low", s.mean_profit}};
    if (r.traces.size() >= kTailMinimumTraces) {
        const TailReport t = switch_statistics(r.traces);
        Json rows = Json::array();
        for (const TailRow& row : t.rows) {
            rows.push_back({{"n", row.n}, {"probability", row.probability}, {"scaled", row.scaled},
                            {"relative_error", row.relative_error}, {"bound", row.bound}});
        }
        j["tail"] = {{"small_n_max", t.small_n_max}, {"fitted_constant", t.fitted_constant}, {"bounded", t.bounded},
                     {"rows", std::move(rows)}};
    }
    return dump(j);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
    if (!out) throw Error("write failed for " + file.string());
}

void write_compare_artifacts(const ProblemFile& f, const RunConfig& c, const CompareRun& run,
                             const std::filesystem::path& dir) {
    const SwitchingProblem& p = f.problem;
    std::filesystem::create_directories(dir);
    const std::string pre = csv_preamble(p, c);
    run.fd.write_csv(dir / "value_field.csv", pre);
    write_text(dir / "fd_summary.json", fd_summary_json(f, c, run.fd));
    write_trace_csv(run.mc.trace, dir / "mc_trace.csv", pre);
    write_text(dir / "mc_summary.json", mc_summary_json(f, c, run.mc));
    if (run.oracle) {
        write_golden({problem_hash(p), run.oracle->chain.n_levels, root_values(run.oracle->value, run.oracle->chain)},
                     dir / "oracle_root.txt");
        write_text(dir / "oracle_summary.json", oracle_summary_json(f, c, *run.oracle));
    }
    write_traces_csv(run.sim, dir / "traces.csv", pre);
    write_text(dir / "simulate_summary.json",
               simulate_summary_json(f, c, run.sim, run.fd.interpolate(p.initial_mode, 0.0, p.x0)));
    write_text(dir / "report.json", run.report.to_json());
}

}  // namespace switchbox
