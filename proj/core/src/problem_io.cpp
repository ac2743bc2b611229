#include "switchbox/problem_io.hpp"

#include "switchbox/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace switchbox {

std::string to_string(FdScheme s) { return s == FdScheme::explicit_euler ? "explicit" : "implicit"; }

FdScheme parse_scheme(std::string_view s) {
    if (s == "explicit") return FdScheme::explicit_euler;
    if (s == "implicit") return FdScheme::implicit_euler;
    throw std::invalid_argument("unknown scheme '" + std::string(s) + "' (expected explicit|implicit)");
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& msg, const YAML::Node& at = YAML::Node()) const {
        std::string where = source_;
        if (at.IsDefined() && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
        throw ProblemError(where + ": " + msg);
    }

    void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& ctx) const {
        if (!map.IsMap()) fail(ctx + " must be a mapping", map);
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key)) fail("unknown field '" + key + "' in " + ctx, kv.first);
        }
    }

    YAML::Node require(const YAML::Node& map, const std::string& key) const {
        YAML::Node n = map[key];
        if (!n) fail("missing required field '" + key + "'", map);
        return n;
    }

    double number(const YAML::Node& n, const std::string& what) const {
        try {
            return n.as<double>();
        } catch (const YAML::Exception&) {
            fail(what + " must be a number", n);
        }
    }

    std::size_t count(const YAML::Node& n, const std::string& what) const {
        try {
            const auto v = n.as<long long>();
            if (v < 0) fail(what + " must be non-negative", n);
            return static_cast<std::size_t>(v);
        } catch (const YAML::Exception&) {
            fail(what + " must be an integer", n);
        }
    }

    std::vector<double> numbers(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence()) fail(what + " must be a list of numbers", n);
        std::vector<double> out;
        for (const auto& e : n) out.push_back(number(e, what));
        return out;
    }

    std::vector<std::size_t> counts(const YAML::Node& n, const std::string& what) const {
        if (n.IsScalar()) return {count(n, what)};
        if (!n.IsSequence()) fail(what + " must be an integer or a list of integers", n);
        std::vector<std::size_t> out;
        for (const auto& e : n) out.push_back(count(e, what));
        return out;
    }

    CoeffExpr coefficient(const YAML::Node& n, const std::string& what) const {
        if (n.IsScalar()) {
            try {
                return parse_expr(n.as<std::string>());
            } catch (const ParseError& e) {
                fail(what + ": " + e.what(), n);
            }
        }
        if (n.IsMap()) {
            const auto family = require(n, "family").as<std::string>();
            if (family == "constant") {
                check_keys(n, {"family", "value"}, what);
                return CoeffExpr::constant(number(require(n, "value"), what + ".value"));
            }
            if (family == "affine") {
                check_keys(n, {"family", "intercept", "slopes"}, what);
                const double intercept = n["intercept"] ? number(n["intercept"], what + ".intercept") : 0.0;
                const auto slopes = numbers(require(n, "slopes"), what + ".slopes");
                return CoeffExpr::affine(intercept, slopes);
            }
            if (family == "geometric") {
                check_keys(n, {"family", "rate", "component"}, what);
                const std::size_t comp = n["component"] ? count(n["component"], what + ".component") : 1;
                if (comp == 0) fail(what + ".component is one-based", n);
                return CoeffExpr::geometric(number(require(n, "rate"), what + ".rate"), comp - 1);
            }
            fail(what + ": unknown family '" + family + "' (constant|affine|geometric)", n);
        }
        fail(what + " must be an expression string or a family mapping", n);
    }

    Box box(const YAML::Node& n, const std::string& what) const {
        check_keys(n, {"lo", "hi"}, what);
        return Box{numbers(require(n, "lo"), what + ".lo"), numbers(require(n, "hi"), what + ".hi")};
    }

private:
    std::string source_;
};

}  // namespace

ProblemFile parse_problem_yaml(std::string_view text, const std::string& source_name) {
    Reader rd(source_name);
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ProblemError(source_name + ": malformed document: " + e.what());
    }
    rd.check_keys(root,
                  {"name", "description", "dimension", "brownian_dimension", "horizon", "modes", "drift", "volatility",
                   "psi", "switching_cost", "alpha", "growth", "diffusion_growth", "validation_box", "fd_box", "x0",
                   "initial_mode", "defaults", "expected", "symmetry"},
                  "problem");

    ProblemFile file;
    SwitchingProblem& p = file.problem;
    p.name = root["name"] ? root["name"].as<std::string>() : std::string("unnamed");
    if (root["description"]) file.description = root["description"].as<std::string>();

    const std::size_t k = rd.count(rd.require(root, "dimension"), "dimension");
    p.diffusion.k = k;
    p.diffusion.d = root["brownian_dimension"] ? rd.count(root["brownian_dimension"], "brownian_dimension") : k;
    p.horizon = rd.number(rd.require(root, "horizon"), "horizon");
    p.modes = rd.count(rd.require(root, "modes"), "modes");
    if (p.modes < 2) throw ProblemError(source_name + ": at least two modes are required (got " + std::to_string(p.modes) + ")");

    const YAML::Node drift = rd.require(root, "drift");
    if (!drift.IsSequence()) rd.fail("drift must be a list", drift);
    for (std::size_t i = 0; i < drift.size(); ++i) p.diffusion.drift.push_back(rd.coefficient(drift[i], "drift[" + std::to_string(i) + "]"));

    const YAML::Node vol = rd.require(root, "volatility");
    if (!vol.IsSequence()) rd.fail("volatility must be a list of rows", vol);
    for (std::size_t r = 0; r < vol.size(); ++r) {
        if (!vol[r].IsSequence() || vol[r].size() != p.diffusion.d) {
            rd.fail("volatility row " + std::to_string(r + 1) + " must have " + std::to_string(p.diffusion.d) + " entries", vol[r]);
        }
        for (std::size_t c = 0; c < vol[r].size(); ++c) {
            p.diffusion.volatility.push_back(rd.coefficient(vol[r][c], "volatility[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
        }
    }
    p.diffusion.growth_constant = root["diffusion_growth"] ? rd.number(root["diffusion_growth"], "diffusion_growth") : 10.0;

    const YAML::Node psi = rd.require(root, "psi");
    if (!psi.IsSequence()) rd.fail("psi must be a list", psi);
    for (std::size_t i = 0; i < psi.size(); ++i) p.psi.push_back(rd.coefficient(psi[i], "psi[" + std::to_string(i) + "]"));

    const YAML::Node g = rd.require(root, "switching_cost");
    if (!g.IsSequence() || g.size() != p.modes) rd.fail("switching_cost must be an m x m matrix", g);
    p.cost.resize(p.modes * p.modes);
    for (std::size_t i = 0; i < p.modes; ++i) {
        if (!g[i].IsSequence() || g[i].size() != p.modes) rd.fail("switching_cost row " + std::to_string(i + 1) + " must have m entries", g[i]);
        for (std::size_t j = 0; j < p.modes; ++j) {
            const YAML::Node e = g[i][j];
            if (e.IsNull()) continue;
            if (i == j) {
                throw ProblemError(source_name + ": diagonal switching cost g_" + std::to_string(i + 1) + std::to_string(i + 1) +
                                   " must be empty (~)");
            }
            p.cost[i * p.modes + j] = rd.coefficient(e, "switching_cost[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        }
    }

    p.alpha = rd.number(rd.require(root, "alpha"), "alpha");
    if (root["growth"]) {
        rd.check_keys(root["growth"], {"constant", "gamma"}, "growth");
        p.growth.constant = rd.number(rd.require(root["growth"], "constant"), "growth.constant");
        p.growth.gamma = rd.number(rd.require(root["growth"], "gamma"), "growth.gamma");
    }
    p.validation_box = rd.box(rd.require(root, "validation_box"), "validation_box");
    if (root["fd_box"]) p.fd_box = rd.box(root["fd_box"], "fd_box");
    p.x0 = rd.numbers(rd.require(root, "x0"), "x0");
    const std::size_t init = rd.count(rd.require(root, "initial_mode"), "initial_mode");
    if (init < 1 || init > p.modes) rd.fail("initial_mode must be in 1.." + std::to_string(p.modes), root["initial_mode"]);
    p.initial_mode = init - 1;

    if (const YAML::Node d = root["defaults"]) {
        rd.check_keys(d,
                      {"grid", "fd_steps", "scheme", "mc_paths", "mc_steps", "degree", "sim_paths", "sim_steps", "oracle_levels",
                       "tol", "picard_max"},
                      "defaults");
        SolverDefaults& s = file.defaults;
        if (d["grid"]) s.grid = rd.counts(d["grid"], "defaults.grid");
        if (d["fd_steps"]) s.fd_steps = rd.count(d["fd_steps"], "defaults.fd_steps");
        if (d["scheme"]) s.scheme = parse_scheme(d["scheme"].as<std::string>());
        if (d["mc_paths"]) s.mc_paths = rd.count(d["mc_paths"], "defaults.mc_paths");
        if (d["mc_steps"]) s.mc_steps = rd.count(d["mc_steps"], "defaults.mc_steps");
        if (d["degree"]) s.degree = rd.count(d["degree"], "defaults.degree");
        if (d["sim_paths"]) s.sim_paths = rd.count(d["sim_paths"], "defaults.sim_paths");
        if (d["sim_steps"]) s.sim_steps = rd.count(d["sim_steps"], "defaults.sim_steps");
        if (d["oracle_levels"]) s.oracle_levels = rd.count(d["oracle_levels"], "defaults.oracle_levels");
        if (d["tol"]) s.tol = rd.number(d["tol"], "defaults.tol");
        if (d["picard_max"]) s.picard_max = rd.count(d["picard_max"], "defaults.picard_max");
    }
    if (file.defaults.grid.size() == 1 && k == 2) file.defaults.grid.push_back(file.defaults.grid[0]);

    if (const YAML::Node e = root["expected"]) {
        rd.check_keys(e, {"values", "policy_at_t0"}, "expected");
        ExpectedValues ev;
        ev.values = rd.numbers(rd.require(e, "values"), "expected.values");
        if (ev.values.size() != p.modes) rd.fail("expected.values must have one entry per mode", e);
        if (const YAML::Node pol = e["policy_at_t0"]) {
            rd.check_keys(pol, {"mode", "action"}, "expected.policy_at_t0");
            const std::size_t mode = rd.count(rd.require(pol, "mode"), "expected.policy_at_t0.mode");
            if (mode < 1 || mode > p.modes) rd.fail("expected.policy_at_t0.mode out of range", pol);
            ev.policy_mode = mode - 1;
            const auto action = rd.require(pol, "action").as<std::string>();
            if (action == "continue") {
                ev.policy_continue = true;
            } else if (action.rfind("switch:", 0) == 0) {
                const std::size_t target = std::stoul(action.substr(7));
                if (target < 1 || target > p.modes) rd.fail("expected.policy_at_t0.action target out of range", pol);
                ev.policy_action = target - 1;
            } else {
                rd.fail("expected.policy_at_t0.action must be 'continue' or 'switch:<mode>'", pol);
            }
        }
        file.expected = ev;
    }

    if (const YAML::Node s = root["symmetry"]) {
        rd.check_keys(s, {"mode_map", "center"}, "symmetry");
        Symmetry sym;
        for (std::size_t m : rd.counts(rd.require(s, "mode_map"), "symmetry.mode_map")) {
            if (m < 1 || m > p.modes) rd.fail("symmetry.mode_map entries must be modes", s);
            sym.mode_map.push_back(m - 1);
        }
        if (sym.mode_map.size() != p.modes) rd.fail("symmetry.mode_map must have one entry per mode", s);
        sym.center = s["center"] ? rd.numbers(s["center"], "symmetry.center") : std::vector<double>(k, 0.0);
        if (sym.center.size() != k) rd.fail("symmetry.center must have dimension k", s);
        file.symmetry = sym;
    }

    try {
        p.check_structure();
    } catch (const ProblemError& e) {
        throw ProblemError(source_name + ": " + e.what());
    }
    return file;
}

std::filesystem::path resolve_problem_path(const std::filesystem::path& path) {
    if (std::filesystem::is_regular_file(path)) return path;
    for (const char* ext : {".yaml", ".yml"}) {
        std::filesystem::path candidate = path;
        candidate += ext;
        if (std::filesystem::is_regular_file(candidate)) return candidate;
    }
    throw ProblemError("problem file not found: " + path.string());
}

ProblemFile load_problem_file(const std::filesystem::path& path) {
    const auto resolved = resolve_problem_path(path);
    std::ifstream in(resolved);
    if (!in) throw ProblemError("cannot open problem file: " + resolved.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem_yaml(ss.str(), resolved.string());
}

}  // namespace switchbox
