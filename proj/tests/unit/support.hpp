#pragma once

#include "switchbox/problem_io.hpp"

#include <filesystem>
#include <string>

namespace test_support {

inline std::filesystem::path source_dir() { return SWITCHBOX_SOURCE_DIR; }

inline switchbox::ProblemFile fixture(const std::string& name) {
    return switchbox::load_problem_file(source_dir() / "problems" / (name + ".yaml"));
}

struct TwoMode {
    std::string psi1 = "0";
    std::string psi2 = "0";
    std::string cost12 = "0.1";
    std::string cost21 = "0.1";
    double alpha = 0.1;
    std::string drift = "0";
    std::string vol = "1";
    double lo = -5.0;
    double hi = 5.0;
    double x0 = 0.0;
    int initial_mode = 1;
    std::string extra;  // appended verbatim
};

inline std::string yaml_of(const TwoMode& s) {
    auto num = [](double v) { return std::to_string(v); };
    return "name: test\ndimension: 1\nhorizon: 1.0\nmodes: 2\n"
           "drift: [\"" + s.drift + "\"]\nvolatility:\n  - [\"" + s.vol + "\"]\n"
           "psi: [\"" + s.psi1 + "\", \"" + s.psi2 + "\"]\n"
           "switching_cost:\n  - [~, \"" + s.cost12 + "\"]\n  - [\"" + s.cost21 + "\", ~]\n"
           "alpha: " + num(s.alpha) + "\ngrowth: {constant: 10.0, gamma: 1.0}\ndiffusion_growth: 10.0\n"
           "validation_box: {lo: [" + num(s.lo) + "], hi: [" + num(s.hi) + "]}\n"
           "fd_box: {lo: [" + num(s.lo) + "], hi: [" + num(s.hi) + "]}\n"
           "x0: [" + num(s.x0) + "]\ninitial_mode: " + std::to_string(s.initial_mode) + "\n" + s.extra;
}

inline switchbox::ProblemFile two_mode_file(const TwoMode& s) { return switchbox::parse_problem_yaml(yaml_of(s)); }
inline switchbox::SwitchingProblem two_mode(const TwoMode& s) { return two_mode_file(s).problem; }

}  // namespace test_support
