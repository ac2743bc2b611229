#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace switchbox {

// Monomials of total degree <= degree in k variables, ordered by degree and then
// lexicographically; the constant comes first.
class PolynomialBasis {
public:
    PolynomialBasis(std::size_t k, std::size_t degree);

    std::size_t size() const noexcept { return exponents_.size() / k_; }
    std::size_t degree() const noexcept { return degree_; }
    void evaluate(std::span<const double> z, std::span<double> out) const;

private:
    std::size_t k_;
    std::size_t degree_;
    std::vector<unsigned> exponents_;  // size() rows of k exponents
};

// Least-squares fit of several targets on the states of one time slice. Inputs are
// standardised per coordinate and the design matrix is decomposed once with a
// column-pivoting QR. When the design is rank deficient the degree is lowered until
// it is not; a slice with no spread in some coordinate is fitted by its mean.
class SliceRegression {
public:
    // states: n rows of k coordinates.
    SliceRegression(std::span<const double> states, std::size_t n, std::size_t k, std::size_t degree);

    std::size_t requested_degree() const noexcept { return requested_; }
    std::size_t degree() const noexcept { return basis_.degree(); }
    // Degree was lowered for rank deficiency (not for a degenerate slice).
    bool reduced() const noexcept { return reduced_; }

    // targets: n rows of `columns` values. Returns fitted values with the same layout.
    std::vector<double> fit_predict(std::span<const double> targets, std::size_t columns) const;

private:
    std::size_t n_;
    std::size_t k_;
    std::size_t requested_;
    bool degenerate_ = false;
    bool reduced_ = false;
    PolynomialBasis basis_;
    struct Fit;
    std::shared_ptr<const Fit> fit_;  // null when only the mean is fitted
};

}  // namespace switchbox
