#include "switchbox/regression.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace switchbox;

TEST_SUITE("picard_mc") {

TEST_CASE("basis ordering and size") {
    const PolynomialBasis b(2, 2);
    CHECK(b.size() == 6);
    std::vector<double> out(6);
    const std::vector<double> z{2.0, 3.0};
    b.evaluate(z, out);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 2.0);
    CHECK(out[2] == 3.0);
}

TEST_CASE("a polynomial target is reproduced exactly") {
    const std::size_t n = 200;
    std::vector<double> x(n), y(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        y[2 * i] = 1.0 - 2.0 * x[i] + 0.5 * x[i] * x[i] * x[i];
        y[2 * i + 1] = 3.0;
    }
    const SliceRegression r(x, n, 1, 4);
    CHECK_FALSE(r.reduced());
    CHECK(r.degree() == 4);
    const auto fit = r.fit_predict(y, 2);
    for (std::size_t i = 0; i < 2 * n; ++i) CHECK(fit[i] == doctest::Approx(y[i]).epsilon(1e-9));
}

TEST_CASE("too few distinct points lower the degree") {
    const std::size_t n = 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(i % 3);
        y[i] = x[i] * x[i];
    }
    const SliceRegression r(x, n, 1, 6);
    CHECK(r.reduced());
    CHECK(r.degree() < 6);
    const auto fit = r.fit_predict(y, 1);
    for (std::size_t i = 0; i < n; ++i) CHECK(fit[i] == doctest::Approx(y[i]).epsilon(1e-9));
}

TEST_CASE("a slice with no spread is fitted by its mean") {
    const std::size_t n = 10;
    std::vector<double> x(n, 1.5), y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i);
    const SliceRegression r(x, n, 1, 4);
    CHECK_FALSE(r.reduced());
    for (double v : r.fit_predict(y, 1)) CHECK(v == doctest::Approx(4.5));
}

}
