#pragma once

#include "switchbox/picard_mc.hpp"
#include "switchbox/problem.hpp"
#include "switchbox/problem_io.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/strategy.hpp"
#include "switchbox/tree_oracle.hpp"
#include "switchbox/value_field.hpp"
#include "switchbox/verify.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace switchbox {

// Everything that determines the numbers a run produces. The output directory is
// deliberately left out of the serialized form so a run can be repeated elsewhere.
struct RunConfig {
    std::string command;
    std::string problem;  // path as given
    std::vector<std::size_t> grid;
    std::size_t fd_steps = 0;
    FdScheme scheme = FdScheme::implicit_euler;
    std::size_t mc_paths = 0;
    std::size_t mc_steps = 0;
    std::size_t degree = 0;
    std::size_t sim_paths = 0;
    std::size_t sim_steps = 0;
    std::size_t oracle_levels = 0;
    std::uint64_t seed = 7;
    double tol = 1e-3;
    std::size_t picard_max = 20;
    std::optional<std::filesystem::path> out_dir;

    std::string to_json() const;  // single line, fixed key order
};

RunConfig make_run_config(const std::string& command, const std::string& problem, const SolverDefaults& d);

// "# problem_hash", "# run_config", "# code_version" comment lines for CSV artifacts.
std::string csv_preamble(const SwitchingProblem& p, const RunConfig& c);

Grid run_grid(const SwitchingProblem& p, const RunConfig& c, std::size_t refine = 1);
ValueField run_fd(const SwitchingProblem& p, const RunConfig& c, std::size_t refine = 1);
PathEnsemble run_mc_ensemble(const SwitchingProblem& p, const RunConfig& c);
McResult run_mc(const SwitchingProblem& p, const RunConfig& c, const PathEnsemble& e);
PathEnsemble run_sim_ensemble(const SwitchingProblem& p, const RunConfig& c);

struct OracleRun {
    ChainApprox chain;
    OracleValue value;
};
// nullopt when the lattice does not apply (k != 1).
std::optional<OracleRun> run_oracle(const SwitchingProblem& p, std::size_t n_levels);

// Solver outputs for verify / compare, plus the report built from them.
struct CompareRun {
    ValueField fd;
    ValueField fd_refined;
    PathEnsemble mc_ensemble;
    McResult mc;
    std::optional<OracleRun> oracle;
    std::optional<std::vector<double>> oracle_refined_root;
    PathEnsemble sim_ensemble;
    StrategyRun sim;
    DeterminismProbe determinism;
    Report report;
};

// Seeds: MC ensemble S, strategy ensemble S + 1, random strategies S + 2.
// The determinism probe recomputes fingerprinted artifacts with a different worker count.
CompareRun run_compare(const ProblemFile& f, const RunConfig& c, const Thresholds& th);

// JSON summaries; each embeds the problem hash, run config and code version.
std::string validation_json(const ProblemFile& f, const RunConfig& c, const ValidationReport& r);
std::string fd_summary_json(const ProblemFile& f, const RunConfig& c, const ValueField& v);
std::string mc_summary_json(const ProblemFile& f, const RunConfig& c, const McResult& r);
std::string oracle_summary_json(const ProblemFile& f, const RunConfig& c, const OracleRun& o);
std::string simulate_summary_json(const ProblemFile& f, const RunConfig& c, const StrategyRun& r, double fd_value);

// Writes the solver artifacts of a compare run and report.json into dir.
void write_compare_artifacts(const ProblemFile& f, const RunConfig& c, const CompareRun& run,
                             const std::filesystem::path& dir);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace switchbox
