#include "switchbox/problem.hpp"

#include "switchbox/error.hpp"
#include "switchbox/hash.hpp"
#include "util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace switchbox {

bool Box::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

bool Box::strictly_contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    }
    return true;
}

void DiffusionSpec::drift_at(double t, std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < k; ++i) out[i] = drift[i].eval(t, x);
}

void DiffusionSpec::volatility_at(double t, std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < k * d; ++i) out[i] = volatility[i].eval(t, x);
}

void DiffusionSpec::covariance_at(double t, std::span<const double> x, std::span<double> out) const {
    std::array<double, 16> small{};
    std::vector<double> large;
    double* s = small.data();
    if (k * d > small.size()) {
        large.resize(k * d);
        s = large.data();
    }
    volatility_at(t, x, std::span<double>(s, k * d));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += s[i * d + r] * s[j * d + r];
            out[i * k + j] = acc;
            out[j * k + i] = acc;
        }
    }
}

const CoeffExpr& SwitchingProblem::switching_cost(std::size_t from, std::size_t to) const {
    const auto& c = cost[from * modes + to];
    if (!c) throw ProblemError("no switching cost defined for " + std::to_string(from + 1) + "->" + std::to_string(to + 1));
    return *c;
}

void SwitchingProblem::check_structure() const {
    if (modes < 2) throw ProblemError("at least two modes are required (got " + std::to_string(modes) + ")");
    const std::size_t k = diffusion.k;
    if (k == 0 || diffusion.d == 0) throw ProblemError("state and Brownian dimensions must be positive");
    if (diffusion.drift.size() != k) throw ProblemError("drift must have " + std::to_string(k) + " components");
    if (diffusion.volatility.size() != k * diffusion.d) {
        throw ProblemError("volatility must be a " + std::to_string(k) + "x" + std::to_string(diffusion.d) + " matrix");
    }
    if (psi.size() != modes) throw ProblemError("psi must have one entry per mode");
    if (cost.size() != modes * modes) throw ProblemError("switching cost must be an m x m matrix");
    for (std::size_t i = 0; i < modes; ++i) {
        for (std::size_t j = 0; j < modes; ++j) {
            const bool present = cost[i * modes + j].has_value();
            if (i == j && present) {
                throw ProblemError("diagonal switching cost g_" + std::to_string(i + 1) + std::to_string(i + 1) +
                                   " must be empty");
            }
            if (i != j && !present) {
                throw ProblemError("missing switching cost g_" + std::to_string(i + 1) + std::to_string(j + 1));
            }
        }
    }
    if (!(alpha > 0.0)) throw ProblemError("alpha must be strictly positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ProblemError("horizon must be positive and finite");
    if (x0.size() != k) throw ProblemError("x0 must have dimension " + std::to_string(k));
    if (initial_mode >= modes) throw ProblemError("initial_mode out of range");
    if (validation_box.lo.size() != k || validation_box.hi.size() != k) {
        throw ProblemError("validation box must have dimension " + std::to_string(k));
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(validation_box.lo[i] < validation_box.hi[i])) throw ProblemError("validation box is empty");
    }
    if (fd_box) {
        if (fd_box->lo.size() != k || fd_box->hi.size() != k) throw ProblemError("fd_box must have dimension " + std::to_string(k));
        if (!fd_box->strictly_contains(x0)) throw ProblemError("x0 must lie strictly inside fd_box");
    }
    auto check_dim = [k](const CoeffExpr& e, const std::string& what) {
        if (e.state_dimension() > k) {
            throw ProblemError(what + " references x" + std::to_string(e.state_dimension()) + " but the state has dimension " +
                               std::to_string(k));
        }
    };
    for (std::size_t i = 0; i < k; ++i) check_dim(diffusion.drift[i], "drift");
    for (const auto& e : diffusion.volatility) check_dim(e, "volatility");
    for (const auto& e : psi) check_dim(e, "psi");
    for (const auto& e : cost) {
        if (e) check_dim(*e, "switching cost");
    }
}

std::string canonical_text(const SwitchingProblem& p) {
    using detail::format_double;
    using detail::format_vector;
    std::string s;
    s += "modes=" + std::to_string(p.modes) + "\n";
    s += "k=" + std::to_string(p.diffusion.k) + "\n";
    s += "d=" + std::to_string(p.diffusion.d) + "\n";
    s += "horizon=" + format_double(p.horizon) + "\n";
    s += "alpha=" + format_double(p.alpha) + "\n";
    s += "growth=" + format_double(p.growth.constant) + "," + format_double(p.growth.gamma) + "\n";
    s += "diffusion_growth=" + format_double(p.diffusion.growth_constant) + "\n";
    for (std::size_t i = 0; i < p.diffusion.k; ++i) s += "b" + std::to_string(i + 1) + "=" + p.diffusion.drift[i].to_string() + "\n";
    for (std::size_t i = 0; i < p.diffusion.volatility.size(); ++i) {
        s += "sigma" + std::to_string(i) + "=" + p.diffusion.volatility[i].to_string() + "\n";
    }
    for (std::size_t i = 0; i < p.modes; ++i) s += "psi" + std::to_string(i + 1) + "=" + p.psi[i].to_string() + "\n";
    for (std::size_t i = 0; i < p.modes; ++i) {
        for (std::size_t j = 0; j < p.modes; ++j) {
            if (i == j) continue;
            s += "g" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "=" + p.switching_cost(i, j).to_string() + "\n";
        }
    }
    s += "x0=" + format_vector(p.x0) + "\n";
    s += "initial_mode=" + std::to_string(p.initial_mode + 1) + "\n";
    s += "validation_box=" + format_vector(p.validation_box.lo) + format_vector(p.validation_box.hi) + "\n";
    if (p.fd_box) s += "fd_box=" + format_vector(p.fd_box->lo) + format_vector(p.fd_box->hi) + "\n";
    return s;
}

std::uint64_t problem_hash(const SwitchingProblem& p) {
    Fnv1a h;
    h.update(canonical_text(p));
    return h.digest();
}

std::array<double, 2> symmetric_eigenvalues_2x2(double a11, double a12, double a22) {
    const double mean = 0.5 * (a11 + a22);
    const double radius = std::hypot(0.5 * (a11 - a22), a12);
    return {mean - radius, mean + radius};
}

double min_symmetric_eigenvalue(std::span<const double> a, std::size_t k) {
    if (k == 1) return a[0];
    if (k == 2) return symmetric_eigenvalues_2x2(a[0], 0.5 * (a[1] + a[2]), a[3])[0];
    Eigen::MatrixXd m(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i * k + j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

constexpr std::array<std::uint32_t, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t index, std::uint32_t base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

double euclidean_norm(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

ValidationReport validate_problem(const SwitchingProblem& p, std::size_t samples, std::uint64_t seed) {
    p.check_structure();
    if (samples == 0) throw std::invalid_argument("validate_problem: samples must be >= 1");
    const std::size_t k = p.dimension();
    const std::size_t d = p.diffusion.d;
    if (k + 1 > kPrimes.size()) throw ProblemError("validation supports at most 15 state dimensions");

    ValidationReport rep;
    rep.samples = samples;
    rep.seed = seed;
    rep.min_cost = std::numeric_limits<double>::infinity();
    rep.min_covariance_eigenvalue = std::numeric_limits<double>::infinity();

    // Cranley-Patterson rotation of the Halton set, keyed by the seed.
    std::uint64_t sm = seed;
    std::vector<double> shift(k + 1);
    for (auto& s : shift) s = detail::to_unit_double(detail::splitmix64(sm));

    std::vector<double> x(k), xp(k), b(k), bp(k), sig(k * d), sigp(k * d), cov(k * k);
    const double lipschitz_step = 1e-4;

    auto add = [&](std::string kind, std::string msg, double t, double measured, double bound) {
        rep.violations.push_back(Violation{std::move(kind), std::move(msg), t, x, measured, bound});
    };

    for (std::size_t s = 0; s < samples; ++s) {
        auto coord = [&](std::size_t dim) {
            const double u = radical_inverse(s + 1, kPrimes[dim]) + shift[dim];
            return u - std::floor(u);
        };
        const double t = p.horizon * coord(0);
        for (std::size_t i = 0; i < k; ++i) {
            x[i] = p.validation_box.lo[i] + (p.validation_box.hi[i] - p.validation_box.lo[i]) * coord(i + 1);
        }
        const double xnorm = euclidean_norm(x);

        try {
            double worst_growth = 0.0;
            for (std::size_t i = 0; i < p.modes; ++i) {
                const double psi = std::fabs(p.psi_at(i, t, x));
                for (std::size_t j = 0; j < p.modes; ++j) {
                    if (i == j) continue;
                    const double g = p.cost_at(i, j, t, x);
                    rep.min_cost = std::min(rep.min_cost, g);
                    if (g < p.alpha) {
                        add("cost_floor",
                            "g_" + std::to_string(i + 1) + std::to_string(j + 1) + " = " + detail::format_double(g) +
                                " below alpha",
                            t, g, p.alpha);
                    }
                    worst_growth = std::max(worst_growth, psi + std::fabs(g));
                }
            }
            const double growth_bound = p.growth.constant * (1.0 + std::pow(xnorm, p.growth.gamma));
            rep.implied_growth_constant =
                std::max(rep.implied_growth_constant, worst_growth / (1.0 + std::pow(xnorm, p.growth.gamma)));
            if (worst_growth > growth_bound) add("growth", "|psi| + |g| exceeds C(1+|x|^gamma)", t, worst_growth, growth_bound);

            p.diffusion.drift_at(t, x, b);
            p.diffusion.volatility_at(t, x, sig);
            const double diff_size = euclidean_norm(b) + euclidean_norm(sig);
            const double diff_bound = p.diffusion.growth_constant * (1.0 + xnorm);
            rep.implied_diffusion_constant = std::max(rep.implied_diffusion_constant, diff_size / (1.0 + xnorm));
            if (diff_size > diff_bound) add("diffusion_growth", "|b| + |sigma| exceeds C(1+|x|)", t, diff_size, diff_bound);

            for (std::size_t r = 0; r < k; ++r) {
                xp = x;
                xp[r] += lipschitz_step;
                p.diffusion.drift_at(t, xp, bp);
                p.diffusion.volatility_at(t, xp, sigp);
                double delta = 0.0;
                for (std::size_t i = 0; i < k; ++i) delta += (bp[i] - b[i]) * (bp[i] - b[i]);
                double delta_sig = 0.0;
                for (std::size_t i = 0; i < k * d; ++i) delta_sig += (sigp[i] - sig[i]) * (sigp[i] - sig[i]);
                const double ratio = (std::sqrt(delta) + std::sqrt(delta_sig)) / lipschitz_step;
                rep.implied_lipschitz_constant = std::max(rep.implied_lipschitz_constant, ratio);
                if (ratio > p.diffusion.growth_constant * (1.0 + 1e-6)) {
                    add("lipschitz", "difference quotient of (b, sigma) exceeds C", t, ratio, p.diffusion.growth_constant);
                }
            }

            p.diffusion.covariance_at(t, x, cov);
            double trace = 0.0;
            for (std::size_t i = 0; i < k; ++i) trace += cov[i * k + i];
            const double lam = min_symmetric_eigenvalue(cov, k);
            rep.min_covariance_eigenvalue = std::min(rep.min_covariance_eigenvalue, lam);
            if (lam < -1e-12 * (1.0 + trace)) add("psd", "sigma sigma^T is not positive semidefinite", t, lam, 0.0);
        } catch (const DomainError& e) {
            add("domain", e.what(), t, 0.0, 0.0);
        }
    }
    return rep;
}

}  // namespace switchbox
