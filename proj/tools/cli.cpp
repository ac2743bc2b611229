#include "cli.hpp"

#include "switchbox/error.hpp"
#include "switchbox/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace switchbox::cli {

namespace {

constexpr std::size_t kDefaultValidationSamples = 4096;

struct Flags {
    std::string command;
    std::string problem;
    std::optional<std::string> grid;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::string> out;
    std::optional<std::string> scheme;
    std::optional<std::size_t> degree;
};

struct Failure {
    int code;
    std::string category;
    std::string message;
};

std::vector<std::size_t> parse_grid(const std::string& text) {
    std::vector<std::size_t> counts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty() || v < 3) {
            throw std::invalid_argument("--grid expects NX[,NY] with counts of at least 3, got '" + text + "'");
        }
        counts.push_back(v);
    }
    if (counts.empty() || counts.size() > 2) throw std::invalid_argument("--grid expects NX[,NY], got '" + text + "'");
    return counts;
}

RunConfig build_config(const Flags& flags, const ProblemFile& file) {
    RunConfig c = make_run_config(flags.command, flags.problem, file.defaults);
    const bool sim_follows_fd = file.defaults.sim_steps == 0;
    if (flags.grid) c.grid = parse_grid(*flags.grid);
    if (flags.steps) {
        if (*flags.steps < 1) throw std::invalid_argument("--steps must be at least 1");
        if (flags.command == "solve-mc") {
            c.mc_steps = *flags.steps;
        } else if (flags.command == "oracle") {
            c.oracle_levels = *flags.steps;
        } else {
            c.fd_steps = *flags.steps;
            if (sim_follows_fd) c.sim_steps = c.fd_steps;
        }
    }
    if (flags.paths) {
        if (*flags.paths < 2) throw std::invalid_argument("--paths must be at least 2");
        if (flags.command == "simulate") {
            c.sim_paths = *flags.paths;
        } else {
            c.mc_paths = *flags.paths;
        }
    }
    if (flags.seed) c.seed = *flags.seed;
    if (flags.tol) {
        if (!(*flags.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
        c.tol = *flags.tol;
    }
    if (flags.scheme) c.scheme = parse_scheme(*flags.scheme);
    if (flags.degree) c.degree = *flags.degree;
    if (flags.out) c.out_dir = *flags.out;
    return c;
}

std::string failed_checks(const Report& r) {
    std::string names;
    for (const Check& c : r.checks) {
        if (c.status == CheckStatus::fail) names += names.empty() ? c.name : "," + c.name;
    }
    return names;
}

// Prints the primary document and, with --out, stores it as `name` in the output directory.
void emit(const RunConfig& c, const std::string& name, const std::string& text, std::ostream& out) {
    if (c.out_dir) {
        std::filesystem::create_directories(*c.out_dir);
        write_text(*c.out_dir / name, text);
    }
    out << text;
}

int execute(const Flags& flags, std::ostream& out, Failure& failure) {
    const ProblemFile file = load_problem_file(resolve_problem_path(flags.problem));
    const SwitchingProblem& p = file.problem;
    RunConfig c = build_config(flags, file);
    const std::string& cmd = flags.command;

    if (cmd == "validate") {
        const std::size_t samples = flags.paths.value_or(kDefaultValidationSamples);
        const ValidationReport r = validate_problem(p, samples, c.seed);
        emit(c, "validation.json", validation_json(file, c, r), out);
        if (!r.ok()) {
            const Violation& v = r.violations.front();
            failure = {kChecksFailed, "validation",
                       std::to_string(r.violations.size()) + " violation(s); first " + v.kind + ": " + v.message};
            return kChecksFailed;
        }
        return kOk;
    }
    p.check_structure();
    if (cmd == "solve-fd") {
        const ValueField v = run_fd(p, c);
        if (c.out_dir) {
            std::filesystem::create_directories(*c.out_dir);
            v.write_csv(*c.out_dir / "value_field.csv", csv_preamble(p, c));
        }
        emit(c, "fd_summary.json", fd_summary_json(file, c, v), out);
        return kOk;
    }
    if (cmd == "solve-mc") {
        const PathEnsemble e = run_mc_ensemble(p, c);
        const McResult r = run_mc(p, c, e);
        if (c.out_dir) {
            std::filesystem::create_directories(*c.out_dir);
            write_trace_csv(r.trace, *c.out_dir / "mc_trace.csv", csv_preamble(p, c));
        }
        emit(c, "mc_summary.json", mc_summary_json(file, c, r), out);
        return kOk;
    }
    if (cmd == "oracle") {
        const auto o = run_oracle(p, c.oracle_levels);
        if (!o) throw SolverError("the lattice oracle needs a one-dimensional state");
        if (c.out_dir) {
            std::filesystem::create_directories(*c.out_dir);
            write_golden({problem_hash(p), o->chain.n_levels, root_values(o->value, o->chain)},
                         *c.out_dir / "oracle_root.txt");
        }
        emit(c, "oracle_summary.json", oracle_summary_json(file, c, *o), out);
        return kOk;
    }
    if (cmd == "simulate") {
        const ValueField v = run_fd(p, c);
        const PathEnsemble e = run_sim_ensemble(p, c);
        const StrategyRun r = simulate_strategy(extract_policy(v, p), e, p);
        if (c.out_dir) {
            std::filesystem::create_directories(*c.out_dir);
            write_traces_csv(r, *c.out_dir / "traces.csv", csv_preamble(p, c));
        }
        emit(c, "simulate_summary.json", simulate_summary_json(file, c, r, v.interpolate(p.initial_mode, 0.0, p.x0)), out);
        return kOk;
    }

    // verify | compare
    const Thresholds th = load_thresholds(default_thresholds_path());
    const CompareRun run = run_compare(file, c, th);
    if (cmd == "compare" && c.out_dir) write_compare_artifacts(file, c, run, *c.out_dir);
    emit(c, "report.json", run.report.to_json(), out);
    if (!run.report.overall_pass()) {
        failure = {kChecksFailed, "check", "failed checks: " + failed_checks(run.report)};
        return kChecksFailed;
    }
    return kOk;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags flags;
    CLI::App app{"Finite-horizon optimal switching: solvers, oracle, strategy simulation and verification"};
    app.name("switchbox");
    app.add_option("command", flags.command, "validate | solve-fd | solve-mc | oracle | simulate | verify | compare")
        ->required()
        ->check(CLI::IsMember({"validate", "solve-fd", "solve-mc", "oracle", "simulate", "verify", "compare"}));
    app.add_option("problem", flags.problem, "problem file (the .yaml suffix may be omitted)")->required();
    app.add_option("--grid", flags.grid, "space nodes per dimension, NX[,NY]");
    app.add_option("--steps", flags.steps, "time steps: FD steps, MC steps for solve-mc, levels for oracle");
    app.add_option("--paths", flags.paths, "MC paths; strategy paths for simulate; samples for validate");
    app.add_option("--seed", flags.seed, "base seed (default 7)");
    app.add_option("--tol", flags.tol, "Picard convergence tolerance");
    app.add_option("--out", flags.out, "output directory for artifacts");
    app.add_option("--scheme", flags.scheme, "FD time stepping")->check(CLI::IsMember({"explicit", "implicit"}));
    app.add_option("--degree", flags.degree, "regression polynomial degree");

    Failure failure{kOk, "", ""};
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << '\n';
        return kUsage;
    }

    try {
        const int code = execute(flags, out, failure);
        if (code != kOk) err << "error: " << failure.category << ": " << one_line(failure.message) << '\n';
        return code;
    } catch (const switchbox::ParseError& e) {
        failure = {kBadProblem, "problem", e.what()};
    } catch (const ProblemError& e) {
        failure = {kBadProblem, "problem", e.what()};
    } catch (const DomainError& e) {
        failure = {kSolverFailure, "solver", e.what()};
    } catch (const SolverError& e) {
        failure = {kSolverFailure, "solver", e.what()};
    } catch (const std::invalid_argument& e) {
        failure = {kUsage, "usage", e.what()};
    } catch (const std::filesystem::filesystem_error& e) {
        failure = {kIoFailure, "io", e.what()};
    } catch (const Error& e) {
        failure = {kIoFailure, "io", e.what()};
    } catch (const std::exception& e) {
        failure = {kSolverFailure, "internal", e.what()};
    }
    err << "error: " << failure.category << ": " << one_line(failure.message) << '\n';
    return failure.code;
}

}  // namespace switchbox::cli
