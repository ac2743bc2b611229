#include "switchbox/sde.hpp"

#include "switchbox/error.hpp"
#include "switchbox/hash.hpp"
#include "switchbox/parallel.hpp"
#include "switchbox/rng.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace switchbox {

PathEnsemble::PathEnsemble(std::size_t n_paths, std::size_t n_steps, std::size_t k, double t0, double horizon,
                           std::uint64_t seed)
    : n_paths_(n_paths), n_steps_(n_steps), k_(k), seed_(seed), dt_((horizon - t0) / static_cast<double>(n_steps)) {
    times_.resize(n_steps + 1);
    for (std::size_t j = 0; j < n_steps; ++j) times_[j] = t0 + static_cast<double>(j) * dt_;
    times_[n_steps] = horizon;
    states_.assign(n_paths * (n_steps + 1) * k, 0.0);
}

std::vector<double> PathEnsemble::state_at(std::size_t path, double s) const {
    std::vector<double> out(k_);
    if (s <= times_.front()) {
        auto x = state(path, 0);
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    if (s >= times_.back()) {
        auto x = state(path, n_steps_);
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    const double pos = (s - times_.front()) / dt_;
    const auto j = std::min(static_cast<std::size_t>(pos), n_steps_ - 1);
    const double w = std::clamp((s - times_[j]) / (times_[j + 1] - times_[j]), 0.0, 1.0);
    auto a = state(path, j);
    auto b = state(path, j + 1);
    for (std::size_t i = 0; i < k_; ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
    return out;
}

std::uint64_t PathEnsemble::fingerprint() const {
    Fnv1a h;
    h.update(static_cast<std::uint64_t>(n_paths_));
    h.update(static_cast<std::uint64_t>(n_steps_));
    h.update(std::span<const double>(times_));
    h.update(std::span<const double>(states_));
    return h.digest();
}

void PathEnsemble::write_csv(const std::filesystem::path& file, std::string_view preamble) const {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << preamble;
    out << "path,step,time";
    for (std::size_t i = 0; i < k_; ++i) out << ",x" << i + 1;
    out << "\n";
    for (std::size_t p = 0; p < n_paths_; ++p) {
        for (std::size_t j = 0; j <= n_steps_; ++j) {
            out << p << "," << j << "," << detail::format_double(times_[j]);
            for (double v : state(p, j)) out << "," << detail::format_double(v);
            out << "\n";
        }
    }
}

PathEnsemble simulate(const SwitchingProblem& p, double t0, std::span<const double> x0, std::size_t n_paths,
                      std::size_t n_steps, std::uint64_t seed) {
    if (n_paths == 0 || n_steps == 0) throw std::invalid_argument("simulate: n_paths and n_steps must be >= 1");
    if (!(t0 >= 0.0 && t0 < p.horizon)) throw std::invalid_argument("simulate: t0 must lie in [0, T)");
    const std::size_t k = p.dimension();
    const std::size_t d = p.diffusion.d;
    if (x0.size() != k) throw std::invalid_argument("simulate: x0 has the wrong dimension");

    PathEnsemble e(n_paths, n_steps, k, t0, p.horizon, seed);
    const double dt = e.dt();
    const double sqrt_dt = std::sqrt(dt);
    const auto& times = e.times();

    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        std::vector<double> b(k), sig(k * d), z(d + 1);
        for (std::size_t path = begin; path < end; ++path) {
            auto first = e.state(path, 0);
            std::copy(x0.begin(), x0.end(), first.begin());
            for (std::size_t j = 0; j < n_steps; ++j) {
                auto cur = e.state(path, j);
                auto next = e.state(path, j + 1);
                try {
                    p.diffusion.drift_at(times[j], cur, b);
                    p.diffusion.volatility_at(times[j], cur, sig);
                } catch (const DomainError& err) {
                    throw SolverError("coefficient domain error at path " + std::to_string(path) + ", step " +
                                      std::to_string(j) + ": " + err.what());
                }
                NormalStream(seed, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(j)).fill(z, d);
                for (std::size_t i = 0; i < k; ++i) {
                    double diffusion = 0.0;
                    for (std::size_t r = 0; r < d; ++r) diffusion += sig[i * d + r] * z[r];
                    next[i] = cur[i] + b[i] * dt + diffusion * sqrt_dt;
                }
            }
        }
    });
    return e;
}

namespace {

double norm(std::span<const double> x) { return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)); }

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double sum = 0.0;
    for (double x : v) sum += x;
    r.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

}  // namespace

MomentReport moment_check(const PathEnsemble& e, int q) {
    if (q != 2 && q != 4 && q != 8) throw std::invalid_argument("moment_check: q must be 2, 4 or 8");
    std::vector<double> sup(e.n_paths());
    parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double m = 0.0;
            for (std::size_t j = 0; j <= e.n_steps(); ++j) m = std::max(m, norm(e.state(p, j)));
            sup[p] = std::pow(m, q);
        }
    });
    const MeanSe ms = mean_se(sup);
    MomentReport r;
    r.q = q;
    r.estimate = ms.mean;
    r.standard_error = ms.se;
    const double x0 = e.n_paths() > 0 ? norm(e.state(0, 0)) : 0.0;
    r.implied_constant = ms.mean / (1.0 + std::pow(x0, q));
    return r;
}

ContinuityReport continuity_check(const PathEnsemble& a, const PathEnsemble& b) {
    if (a.n_paths() != b.n_paths() || a.dimension() != b.dimension()) {
        throw std::invalid_argument("continuity_check: ensembles must have matching path counts and dimensions");
    }
    std::vector<double> grid = a.times();
    grid.insert(grid.end(), b.times().begin(), b.times().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> sup(a.n_paths());
    parallel_for(a.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double m = 0.0;
            for (double s : grid) {
                const auto xa = a.state_at(p, s);
                const auto xb = b.state_at(p, s);
                double d2 = 0.0;
                for (std::size_t i = 0; i < xa.size(); ++i) d2 += (xa[i] - xb[i]) * (xa[i] - xb[i]);
                m = std::max(m, d2);
            }
            sup[p] = m;
        }
    });
    ContinuityReport r;
    r.estimate = mean_se(sup).mean;
    if (a.n_paths() == 0) return r;
    const auto x = a.state(0, 0);
    const auto xp = b.state(0, 0);
    double dx2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dx2 += (x[i] - xp[i]) * (x[i] - xp[i]);
    const double scale = (1.0 + norm(x) * norm(x)) * (dx2 + std::fabs(a.t0() - b.t0()));
    r.implied_constant = scale > 0.0 ? r.estimate / scale : 0.0;
    return r;
}

}  // namespace switchbox
