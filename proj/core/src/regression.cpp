#include "switchbox/regression.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace switchbox {

namespace {

void enumerate(std::size_t k, std::size_t total, std::size_t dim, std::vector<unsigned>& current,
               std::vector<unsigned>& out) {
    if (dim + 1 == k) {
        current[dim] = static_cast<unsigned>(total);
        out.insert(out.end(), current.begin(), current.end());
        return;
    }
    for (std::size_t e = total + 1; e-- > 0;) {
        current[dim] = static_cast<unsigned>(e);
        enumerate(k, total - e, dim + 1, current, out);
    }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

struct SliceRegression::Fit {
    Eigen::MatrixXd design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

PolynomialBasis::PolynomialBasis(std::size_t k, std::size_t degree) : k_(k), degree_(degree) {
    if (k == 0) throw std::invalid_argument("basis dimension must be positive");
    std::vector<unsigned> current(k, 0);
    for (std::size_t total = 0; total <= degree; ++total) enumerate(k, total, 0, current, exponents_);
}

void PolynomialBasis::evaluate(std::span<const double> z, std::span<double> out) const {
    for (std::size_t b = 0; b < size(); ++b) {
        double v = 1.0;
        for (std::size_t d = 0; d < k_; ++d) {
            for (unsigned e = 0; e < exponents_[b * k_ + d]; ++e) v *= z[d];
        }
        out[b] = v;
    }
}

SliceRegression::SliceRegression(std::span<const double> states, std::size_t n, std::size_t k, std::size_t degree)
    : n_(n), k_(k), requested_(degree), basis_(k, 0) {
    if (n == 0) throw std::invalid_argument("regression needs at least one sample");
    std::vector<double> mean(k, 0.0), scale(k, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t d = 0; d < k; ++d) mean[d] += states[p * k + d];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t d = 0; d < k; ++d) {
            const double c = states[p * k + d] - mean[d];
            scale[d] += c * c;
        }
    }
    // coordinates without spread carry no information and are left out
    std::vector<std::size_t> active;
    for (std::size_t d = 0; d < k; ++d) {
        scale[d] = std::sqrt(scale[d] / static_cast<double>(n));
        if (scale[d] > 1e-12 * (1.0 + std::fabs(mean[d]))) active.push_back(d);
    }
    degenerate_ = active.empty();
    if (degenerate_ || degree == 0) return;

    std::vector<double> z(active.size());
    for (std::size_t deg = degree; deg >= 1; --deg) {
        PolynomialBasis basis(active.size(), deg);
        const std::size_t cols = basis.size();
        if (cols > n) continue;
        std::vector<double> design(n * cols);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t a = 0; a < active.size(); ++a) {
                const std::size_t d = active[a];
                z[a] = (states[p * k + d] - mean[d]) / scale[d];
            }
            basis.evaluate(z, std::span<double>(design.data() + p * cols, cols));
        }
        auto fit = std::make_shared<Fit>();
        fit->design = Eigen::Map<const RowMatrix>(design.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
        fit->qr.compute(fit->design);
        if (static_cast<std::size_t>(fit->qr.rank()) == cols) {
            basis_ = std::move(basis);
            fit_ = std::move(fit);
            return;
        }
        reduced_ = true;
    }
    // nothing above the constant survived
}

std::vector<double> SliceRegression::fit_predict(std::span<const double> targets, std::size_t columns) const {
    if (targets.size() != n_ * columns) throw std::invalid_argument("target shape does not match the slice");
    std::vector<double> out(n_ * columns);
    if (!fit_) {
        for (std::size_t c = 0; c < columns; ++c) {
            double mean = 0.0;
            for (std::size_t p = 0; p < n_; ++p) mean += targets[p * columns + c];
            mean /= static_cast<double>(n_);
            for (std::size_t p = 0; p < n_; ++p) out[p * columns + c] = mean;
        }
        return out;
    }
    const auto rows = static_cast<Eigen::Index>(n_);
    const Eigen::Map<const RowMatrix> y(targets.data(), rows, static_cast<Eigen::Index>(columns));
    const Eigen::MatrixXd coef = fit_->qr.solve(Eigen::MatrixXd(y));
    Eigen::Map<RowMatrix>(out.data(), rows, static_cast<Eigen::Index>(columns)) = fit_->design * coef;
    return out;
}

}  // namespace switchbox
