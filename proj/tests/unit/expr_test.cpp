#include "switchbox/error.hpp"
#include "switchbox/expr.hpp"

#include <doctest.h>

#include <array>
#include <bit>
#include <cstdint>
#include <random>
#include <string>

using namespace switchbox;

namespace {

// Random well-formed source over the full grammar.
std::string random_source(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    switch (pick(rng)) {
        case 0: return std::to_string(std::uniform_int_distribution<int>(0, 99)(rng)) + ".25";
        case 1: return "t";
        case 2: return "x" + std::to_string(std::uniform_int_distribution<int>(1, 2)(rng));
        case 3: return random_source(rng, depth - 1) + " + " + random_source(rng, depth - 1);
        case 4: return random_source(rng, depth - 1) + " - " + random_source(rng, depth - 1);
        case 5: return random_source(rng, depth - 1) + " * " + random_source(rng, depth - 1);
        case 6: return random_source(rng, depth - 1) + " / " + random_source(rng, depth - 1);
        case 7: return "(" + random_source(rng, depth - 1) + ")^" + random_source(rng, 0);
        case 8: return "-" + random_source(rng, 0);
        case 9: return "max(" + random_source(rng, depth - 1) + ", " + random_source(rng, depth - 1) + ")";
        case 10: return "abs(" + random_source(rng, depth - 1) + ")";
        default: return "(" + random_source(rng, depth - 1) + ")";
    }
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("parser builds the documented trees") {
    CHECK(parse_expr("x1 - 1").to_sexpr() == "(sub (var x1) (const 1))");
    CHECK(parse_expr("max(0, x1)^2").to_sexpr() == "(pow (max (const 0) (var x1)) (const 2))");
}

TEST_CASE("incomplete expression reports end of input") {
    try {
        parse_expr("x1 +");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 5);
        CHECK(std::string(e.what()).find("end of input") != std::string::npos);
    }
}

TEST_CASE("unknown identifiers and wrong arity are rejected") {
    CHECK_THROWS_AS(parse_expr("y + 1"), ParseError);
    CHECK_THROWS_AS(parse_expr("x0"), ParseError);
    CHECK_THROWS_AS(parse_expr("exp(1, 2)"), ParseError);
    CHECK_THROWS_AS(parse_expr("max(1)"), ParseError);
    CHECK_THROWS_AS(parse_expr("sin(x1)"), ParseError);
    CHECK_THROWS_AS(parse_expr("(x1"), ParseError);
    CHECK_THROWS_AS(parse_expr("2^3^2"), ParseError);  // one exponent per factor; parenthesise to chain
}

TEST_CASE("errors on a later line carry that line") {
    try {
        parse_expr("x1 +\n  * 2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("evaluation examples") {
    const std::array<double, 1> three{3.0};
    const std::array<double, 1> zero{0.0};
    CHECK(parse_expr("x1 - 1").eval(0.0, three) == 2.0);
    CHECK(parse_expr("exp(0)*t").eval(0.5, zero) == 0.5);
    CHECK(parse_expr("-x1^2").eval(0.0, three) == 9.0);
    CHECK(parse_expr("min(4, x1, 7)").eval(0.0, three) == 3.0);
    CHECK(parse_expr("0 - x1").eval(0.0, three) == -3.0);
}

TEST_CASE("domain errors name the subexpression") {
    const std::array<double, 1> zero{0.0};
    const std::array<double, 1> neg{-1.0};
    try {
        parse_expr("2 + 1/x1").eval(0.0, zero);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(e.subexpression() == "(1 / x1)");
    }
    CHECK_THROWS_AS(parse_expr("log(x1)").eval(0.0, zero), DomainError);
    CHECK_THROWS_AS(parse_expr("sqrt(x1)").eval(0.0, neg), DomainError);
    CHECK_NOTHROW(parse_expr("sqrt(x1)").eval(0.0, zero));
}

TEST_CASE("state index beyond the vector is an argument error") {
    const std::array<double, 1> x{1.0};
    CHECK_THROWS_AS(parse_expr("x2").eval(0.0, x), std::invalid_argument);
}

TEST_CASE("print then parse is structurally identical") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 500; ++i) {
        const std::string src = random_source(rng, 4);
        CAPTURE(src);
        const CoeffExpr a = parse_expr(src);
        const CoeffExpr b = parse_expr(a.to_string());
        CHECK(a == b);
    }
}

TEST_CASE("evaluation is bitwise repeatable") {
    const CoeffExpr e = parse_expr("exp(0.3*x1) * sqrt(abs(x2) + 1) / (1 + t^2) - max(x1, x2, 0.5)");
    const std::array<double, 2> x{0.7, -1.3};
    const std::uint64_t first = std::bit_cast<std::uint64_t>(e.eval(0.25, x));
    for (int i = 0; i < 100; ++i) CHECK(std::bit_cast<std::uint64_t>(e.eval(0.25, x)) == first);
}

TEST_CASE("families") {
    const std::array<double, 2> x{2.0, 3.0};
    const std::array<double, 2> slopes{0.5, -1.0};
    CHECK(CoeffExpr::affine(1.0, slopes).eval(0.0, x) == doctest::Approx(1.0 + 1.0 - 3.0));
    CHECK(CoeffExpr::geometric(0.2, 1).eval(0.0, x) == doctest::Approx(0.6));
    CHECK(CoeffExpr::constant(4.0).is_constant());
    CHECK(parse_expr("x2 + t").state_dimension() == 2);
    CHECK(parse_expr("x2 + t").uses_time());
}

}
