#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace switchbox {

// Coefficient expressions over the time variable `t` and state variables `x1..xk`.
//
// Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ('^' atom)?
//   atom   := number | ident | func '(' expr (',' expr)* ')' | '(' expr ')' | '-' atom
//
// Functions: exp, log, abs, sqrt (one argument), max, min (two or more).
//
// The tree is stored in post-order, so evaluation is a single pass over the
// node array with an operand stack and structural equality is array equality.
class CoeffExpr {
public:
    enum class Op : std::uint8_t {
        constant,
        time,
        state,
        add,
        sub,
        mul,
        div,
        pow,
        neg,
        exp,
        log,
        abs,
        sqrt,
        max,
        min,
    };

    struct Node {
        Op op = Op::constant;
        std::uint32_t arity = 0;
        std::uint32_t state_index = 0;  // zero-based, only for Op::state
        double value = 0.0;             // only for Op::constant

        friend bool operator==(const Node&, const Node&) = default;
    };

    CoeffExpr();  // the constant 0

    static CoeffExpr constant(double value);
    static CoeffExpr time();
    static CoeffExpr state(std::size_t index);  // zero-based: state(0) is x1

    // Built-in families.
    static CoeffExpr affine(double intercept, std::span<const double> slopes);
    static CoeffExpr geometric(double rate, std::size_t index);

    // Throws DomainError naming the offending subexpression; std::invalid_argument
    // if the expression references a state component beyond x.size().
    double eval(double t, std::span<const double> x) const;

    std::string to_string() const;
    // Prefix tree dump, e.g. "(sub (var x1) (const 1))".
    std::string to_sexpr() const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    // Highest referenced state index, one-based (0 when the expression ignores x).
    std::size_t state_dimension() const noexcept { return state_dim_; }
    bool uses_time() const noexcept;
    bool is_constant() const noexcept;

    friend bool operator==(const CoeffExpr& a, const CoeffExpr& b) { return a.nodes_ == b.nodes_; }

    // Assembles a tree from post-order nodes; validates arities.
    static CoeffExpr from_nodes(std::vector<Node> nodes);

private:
    std::vector<Node> nodes_;
    std::size_t max_depth_ = 1;
    std::size_t state_dim_ = 0;

    void finalize();
    std::size_t subtree_begin(std::size_t root) const;
    std::string subtree_string(std::size_t root) const;
    std::string subtree_sexpr(std::size_t root) const;
};

CoeffExpr parse_expr(std::string_view source);

}  // namespace switchbox
