#pragma once

#include "switchbox/problem.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace switchbox {

enum class FdScheme { explicit_euler, implicit_euler };

std::string to_string(FdScheme s);
FdScheme parse_scheme(std::string_view s);

// Per-fixture solver settings; every field can be overridden on the command line.
struct SolverDefaults {
    std::vector<std::size_t> grid{201};
    std::size_t fd_steps = 400;
    FdScheme scheme = FdScheme::implicit_euler;
    std::size_t mc_paths = 50000;
    std::size_t mc_steps = 50;
    std::size_t degree = 4;
    std::size_t sim_paths = 20000;
    std::size_t sim_steps = 0;  // 0: match fd_steps
    std::size_t oracle_levels = 2000;
    double tol = 1e-3;
    std::size_t picard_max = 20;
};

// Known closed-form values at (0, x0) per mode, and optionally the action
// the extracted policy must take at t = 0 in a given mode.
struct ExpectedValues {
    std::vector<double> values;
    std::optional<std::size_t> policy_mode;
    std::optional<std::size_t> policy_action;  // target mode, or nullopt for "continue"
    bool policy_continue = false;
};

// v_i(t, x) = v_{mode_map[i]}(t, 2*center - x).
struct Symmetry {
    std::vector<std::size_t> mode_map;
    std::vector<double> center;
};

struct ProblemFile {
    SwitchingProblem problem;
    SolverDefaults defaults;
    std::optional<ExpectedValues> expected;
    std::optional<Symmetry> symmetry;
    std::string description;
};

// Accepts "problems/benchmark" as shorthand for "problems/benchmark.yaml".
std::filesystem::path resolve_problem_path(const std::filesystem::path& path);
ProblemFile load_problem_file(const std::filesystem::path& path);
ProblemFile parse_problem_yaml(std::string_view text, const std::string& source_name = "<string>");

}  // namespace switchbox
