#pragma once

#include "switchbox/expr.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace switchbox {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dimension() const noexcept { return lo.size(); }
    bool contains(std::span<const double> x) const;
    bool strictly_contains(std::span<const double> x) const;
};

// dX = b(t, X) dt + sigma(t, X) dB with X in R^k, B in R^d.
struct DiffusionSpec {
    std::size_t k = 1;
    std::size_t d = 1;
    std::vector<CoeffExpr> drift;       // k entries
    std::vector<CoeffExpr> volatility;  // k*d entries, row-major
    double growth_constant = 1.0;       // declared C in |b| + |sigma| <= C(1 + |x|)

    const CoeffExpr& sigma(std::size_t row, std::size_t col) const { return volatility[row * d + col]; }

    void drift_at(double t, std::span<const double> x, std::span<double> out) const;
    void volatility_at(double t, std::span<const double> x, std::span<double> out) const;
    // sigma sigma^T, k*k row-major.
    void covariance_at(double t, std::span<const double> x, std::span<double> out) const;
};

struct GrowthBound {
    double constant = 1.0;
    double gamma = 1.0;
};

// Finite-horizon m-mode optimal switching problem with zero terminal value.
// Modes are zero-based in the API; files and CSV output use one-based labels.
struct SwitchingProblem {
    std::string name;
    std::size_t modes = 2;
    DiffusionSpec diffusion;
    std::vector<CoeffExpr> psi;                 // profit rate per mode
    std::vector<std::optional<CoeffExpr>> cost;  // m*m, diagonal empty
    double alpha = 0.0;
    double horizon = 1.0;
    GrowthBound growth;
    Box validation_box;
    std::optional<Box> fd_box;
    std::vector<double> x0;
    std::size_t initial_mode = 0;

    std::size_t dimension() const noexcept { return diffusion.k; }
    const CoeffExpr& switching_cost(std::size_t from, std::size_t to) const;

    double psi_at(std::size_t mode, double t, std::span<const double> x) const { return psi[mode].eval(t, x); }
    double cost_at(std::size_t from, std::size_t to, double t, std::span<const double> x) const {
        return switching_cost(from, to).eval(t, x);
    }

    // Throws ProblemError on structural defects: m < 2, diagonal or missing
    // off-diagonal costs, inconsistent dimensions, alpha <= 0, bad horizon.
    void check_structure() const;
};

// Stable textual form of every field that influences a solve.
std::string canonical_text(const SwitchingProblem& p);
std::uint64_t problem_hash(const SwitchingProblem& p);

struct Violation {
    std::string kind;  // cost_floor | growth | diffusion_growth | lipschitz | psd | domain
    std::string message;
    double t = 0.0;
    std::vector<double> x;
    double measured = 0.0;
    double bound = 0.0;
};

struct ValidationReport {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<Violation> violations;
    double min_cost = 0.0;
    double implied_growth_constant = 0.0;     // max (|psi_i| + |g_ij|) / (1 + |x|^gamma)
    double implied_diffusion_constant = 0.0;  // max (|b| + |sigma|) / (1 + |x|)
    double implied_lipschitz_constant = 0.0;
    double min_covariance_eigenvalue = 0.0;

    bool ok() const noexcept { return violations.empty(); }
};

// Samples a scrambled Halton set over [0, T] x validation_box. Structural defects
// throw ProblemError; everything else is reported as a violation with its witness.
ValidationReport validate_problem(const SwitchingProblem& p, std::size_t samples, std::uint64_t seed);

// Eigenvalues of [[a11, a12], [a12, a22]] in ascending order.
std::array<double, 2> symmetric_eigenvalues_2x2(double a11, double a12, double a22);
// Smallest eigenvalue of a symmetric k*k row-major matrix.
double min_symmetric_eigenvalue(std::span<const double> a, std::size_t k);

}  // namespace switchbox
