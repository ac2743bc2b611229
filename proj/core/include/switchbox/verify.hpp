#pragma once

#include "switchbox/picard_mc.hpp"
#include "switchbox/problem.hpp"
#include "switchbox/problem_io.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/strategy.hpp"
#include "switchbox/tree_oracle.hpp"
#include "switchbox/value_field.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace switchbox {

// Limits for every check; loaded from config/thresholds.yaml, never defaulted in code.
struct Thresholds {
    struct ClosedForm {
        double fd_abs, mc_se_multiple, mc_abs, oracle_abs;
    } closed_form;
    struct OracleEquivalence {
        double fd_abs, mc_se_multiple, mc_abs, level_doubling_abs;
    } oracle_equivalence;
    struct Picard {
        double se_multiple, tol;
        std::size_t max_iterations;
    } picard;
    struct Complementarity {
        double max_abs, slack_tol, roundoff_floor;
    } complementarity;
    struct Obstacle {
        double tol;
    } obstacle;
    struct Strategy {
        double se_multiple, abs, random_se_multiple;
        std::size_t random_strategies, random_paths;
    } strategy;
    struct SwitchTail {
        double relative_se_multiple;
    } switch_tail;
    struct Dpp {
        double se_multiple, abs;
    } dpp;
    struct Symmetry {
        double max_abs;
    } symmetry;
    struct FdVsMc {
        double se_multiple, abs;
    } fd_vs_mc;
    struct UpperBound {
        double se_multiple;
    } upper_bound;
    struct Continuity {
        double probe_fraction, safety;
    } continuity;
};

Thresholds load_thresholds(const std::filesystem::path& file);
// $SWITCHBOX_THRESHOLDS, else the source tree copy, else the installed copy.
std::filesystem::path default_thresholds_path();

std::string code_version();

enum class CheckStatus { pass, fail, skipped };
std::string to_string(CheckStatus s);

struct Check {
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    double measured = 0.0;
    double threshold = 0.0;
    std::string provenance;
    std::string detail;
};

struct Report {
    std::string problem;
    std::uint64_t problem_hash = 0;
    std::string run_config_json;  // embedded verbatim as an object
    std::vector<Check> checks;

    bool overall_pass() const;
    const Check* find(const std::string& name) const;
    std::string to_json() const;
};

// Bit fingerprints of the same artifacts computed with two different worker counts.
struct DeterminismProbe {
    std::size_t threads_a = 0;
    std::size_t threads_b = 0;
    std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> fingerprints;
};

// Optional prerequisites; a check whose inputs are missing is reported as skipped.
struct VerifyInputs {
    const ExpectedValues* expected = nullptr;
    const Symmetry* symmetry = nullptr;
    const ValueField* fd = nullptr;
    const ValueField* fd_refined = nullptr;
    const McResult* mc = nullptr;
    std::size_t mc_n_max = 0;
    const ChainApprox* chain = nullptr;
    const OracleValue* oracle = nullptr;
    std::optional<std::vector<double>> oracle_refined_root;  // at twice the levels
    const PathEnsemble* sim_ensemble = nullptr;
    const StrategyRun* sim = nullptr;
    std::uint64_t random_seed = 0;
    const DeterminismProbe* determinism = nullptr;

    std::string fd_label = "fd";
    std::string fd_refined_label = "fd_refined";
    std::string mc_label = "mc";
    std::string oracle_label = "oracle";
    std::string sim_label = "simulation";
};

// Check order: closed_form, oracle_equivalence, picard_monotone, complementarity_residual,
// obstacle_inequality, strategy_optimality, switch_tail, dpp, symmetry, determinism,
// fd_vs_mc, upper_bound, continuity_probe.
Report cross_check(const SwitchingProblem& p, const VerifyInputs& in, const Thresholds& th);

}  // namespace switchbox
