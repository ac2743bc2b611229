#include "switchbox/expr.hpp"

#include "switchbox/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace switchbox {

namespace {

using Op = CoeffExpr::Op;
using Node = CoeffExpr::Node;

struct FunctionInfo {
    std::string_view name;
    Op op;
    std::uint32_t min_arity;
    std::uint32_t max_arity;
};

constexpr std::array<FunctionInfo, 6> kFunctions{{
    {"exp", Op::exp, 1, 1},
    {"log", Op::log, 1, 1},
    {"abs", Op::abs, 1, 1},
    {"sqrt", Op::sqrt, 1, 1},
    {"max", Op::max, 2, 64},
    {"min", Op::min, 2, 64},
}};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const FunctionInfo* find_function(Op op) {
    for (const auto& f : kFunctions) {
        if (f.op == op) return &f;
    }
    return nullptr;
}

std::uint32_t fixed_arity(Op op) {
    switch (op) {
        case Op::constant:
        case Op::time:
        case Op::state:
            return 0;
        case Op::neg:
        case Op::exp:
        case Op::log:
        case Op::abs:
        case Op::sqrt:
            return 1;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow:
            return 2;
        case Op::max:
        case Op::min:
            return 0;  // variadic
    }
    return 0;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), end);
}

const char* binary_symbol(Op op) {
    switch (op) {
        case Op::add: return "+";
        case Op::sub: return "-";
        case Op::mul: return "*";
        case Op::div: return "/";
        case Op::pow: return "^";
        default: return "?";
    }
}

const char* sexpr_name(Op op) {
    switch (op) {
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::div: return "div";
        case Op::pow: return "pow";
        case Op::neg: return "neg";
        case Op::exp: return "exp";
        case Op::log: return "log";
        case Op::abs: return "abs";
        case Op::sqrt: return "sqrt";
        case Op::max: return "max";
        case Op::min: return "min";
        default: return "?";
    }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser emitting post-order nodes.

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    std::vector<Node> run() {
        skip_space();
        parse_expr();
        skip_space();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return std::move(out_);
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::vector<Node> out_;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, line_, col_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t line, std::size_t col) const {
        throw ParseError(msg, line, col);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }

    bool accept(char c) {
        skip_space();
        if (peek() == c) {
            advance();
            skip_space();
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_space();
        if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
        if (peek() != c) fail(std::string("expected '") + c + "' but found '" + peek() + "'");
        advance();
        skip_space();
    }

    void emit(Op op, std::uint32_t arity) { out_.push_back(Node{op, arity, 0, 0.0}); }

    void parse_expr() {
        parse_term();
        for (;;) {
            if (accept('+')) {
                parse_term();
                emit(Op::add, 2);
            } else if (accept('-')) {
                parse_term();
                emit(Op::sub, 2);
            } else {
                return;
            }
        }
    }

    void parse_term() {
        parse_factor();
        for (;;) {
            if (accept('*')) {
                parse_factor();
                emit(Op::mul, 2);
            } else if (accept('/')) {
                parse_factor();
                emit(Op::div, 2);
            } else {
                return;
            }
        }
    }

    void parse_factor() {
        parse_atom();
        if (accept('^')) {
            parse_atom();
            emit(Op::pow, 2);
        }
    }

    void parse_atom() {
        skip_space();
        if (at_end()) fail("unexpected end of input");
        const char c = peek();
        if (c == '-') {
            advance();
            parse_atom();
            emit(Op::neg, 1);
            return;
        }
        if (c == '(') {
            advance();
            skip_space();
            parse_expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            parse_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            parse_identifier();
            return;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    void parse_number() {
        const std::size_t start = pos_;
        const std::size_t line = line_, col = col_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.') {
            advance();
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            const std::size_t save_pos = pos_, save_col = col_;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                pos_ = save_pos;
                col_ = save_col;
            } else {
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
            }
        }
        const std::string_view text = src_.substr(start, pos_ - start);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
            fail_at("syntax error: malformed number '" + std::string(text) + "'", line, col);
        }
        out_.push_back(Node{Op::constant, 0, 0, value});
        skip_space();
    }

    void parse_identifier() {
        const std::size_t start = pos_;
        const std::size_t line = line_, col = col_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
        const std::string name(src_.substr(start, pos_ - start));
        skip_space();

        if (peek() == '(') {
            const FunctionInfo* fn = find_function(name);
            if (fn == nullptr) fail_at("unknown identifier '" + name + "'", line, col);
            advance();
            skip_space();
            std::uint32_t args = 0;
            parse_expr();
            ++args;
            while (accept(',')) {
                parse_expr();
                ++args;
            }
            expect(')');
            if (args < fn->min_arity || args > fn->max_arity) {
                const std::string expected = fn->min_arity == fn->max_arity
                                                 ? std::to_string(fn->min_arity)
                                                 : "at least " + std::to_string(fn->min_arity);
                fail_at("arity mismatch: " + name + " expects " + expected + " argument(s), got " +
                            std::to_string(args),
                        line, col);
            }
            emit(fn->op, args);
            return;
        }

        if (name == "t") {
            emit(Op::time, 0);
            return;
        }
        if (name.size() >= 2 && name[0] == 'x' && name[1] != '0' &&
            std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            std::uint32_t index = 0;
            auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (ec == std::errc{} && ptr == name.data() + name.size() && index >= 1) {
                out_.push_back(Node{Op::state, 0, index - 1, 0.0});
                return;
            }
        }
        if (find_function(name) != nullptr) fail_at("syntax error: expected '(' after function '" + name + "'", line, col);
        fail_at("unknown identifier '" + name + "'", line, col);
    }
};

}  // namespace

// ---------------------------------------------------------------------------

CoeffExpr::CoeffExpr() : nodes_{Node{Op::constant, 0, 0, 0.0}} { finalize(); }

CoeffExpr CoeffExpr::constant(double value) {
    CoeffExpr e;
    if (std::signbit(value) && value != 0.0) {
        e.nodes_ = {Node{Op::constant, 0, 0, -value}, Node{Op::neg, 1, 0, 0.0}};
    } else {
        e.nodes_ = {Node{Op::constant, 0, 0, value == 0.0 ? 0.0 : value}};
    }
    e.finalize();
    return e;
}

CoeffExpr CoeffExpr::time() {
    CoeffExpr e;
    e.nodes_ = {Node{Op::time, 0, 0, 0.0}};
    e.finalize();
    return e;
}

CoeffExpr CoeffExpr::state(std::size_t index) {
    CoeffExpr e;
    e.nodes_ = {Node{Op::state, 0, static_cast<std::uint32_t>(index), 0.0}};
    e.finalize();
    return e;
}

CoeffExpr CoeffExpr::affine(double intercept, std::span<const double> slopes) {
    std::vector<Node> nodes = constant(intercept).nodes_;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (slopes[i] == 0.0) continue;
        const bool negative = slopes[i] < 0.0;
        nodes.push_back(Node{Op::constant, 0, 0, std::fabs(slopes[i])});
        nodes.push_back(Node{Op::state, 0, static_cast<std::uint32_t>(i), 0.0});
        nodes.push_back(Node{Op::mul, 2, 0, 0.0});
        nodes.push_back(Node{negative ? Op::sub : Op::add, 2, 0, 0.0});
    }
    return from_nodes(std::move(nodes));
}

CoeffExpr CoeffExpr::geometric(double rate, std::size_t index) {
    std::vector<Node> nodes = constant(rate).nodes_;
    nodes.push_back(Node{Op::state, 0, static_cast<std::uint32_t>(index), 0.0});
    nodes.push_back(Node{Op::mul, 2, 0, 0.0});
    return from_nodes(std::move(nodes));
}

CoeffExpr CoeffExpr::from_nodes(std::vector<Node> nodes) {
    CoeffExpr e;
    e.nodes_ = std::move(nodes);
    e.finalize();
    return e;
}

void CoeffExpr::finalize() {
    std::size_t depth = 0;
    max_depth_ = 1;
    state_dim_ = 0;
    for (const Node& n : nodes_) {
        const std::uint32_t fixed = fixed_arity(n.op);
        const bool variadic = n.op == Op::max || n.op == Op::min;
        if ((variadic && n.arity < 2) || (!variadic && n.arity != fixed)) {
            throw std::invalid_argument("malformed expression: bad arity");
        }
        if (depth < n.arity) throw std::invalid_argument("malformed expression: stack underflow");
        depth = depth - n.arity + 1;
        max_depth_ = std::max(max_depth_, depth);
        if (n.op == Op::state) state_dim_ = std::max<std::size_t>(state_dim_, n.state_index + 1);
    }
    if (depth != 1) throw std::invalid_argument("malformed expression: dangling operands");
}

bool CoeffExpr::uses_time() const noexcept {
    return std::any_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.op == Op::time; });
}

bool CoeffExpr::is_constant() const noexcept {
    return std::none_of(nodes_.begin(), nodes_.end(),
                        [](const Node& n) { return n.op == Op::time || n.op == Op::state; });
}

double CoeffExpr::eval(double t, std::span<const double> x) const {
    if (state_dim_ > x.size()) {
        throw std::invalid_argument("expression references x" + std::to_string(state_dim_) + " but state has dimension " +
                                    std::to_string(x.size()));
    }
    std::array<double, 32> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > small.size()) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t sp = 0;

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        double r = 0.0;
        switch (n.op) {
            case Op::constant: r = n.value; break;
            case Op::time: r = t; break;
            case Op::state: r = x[n.state_index]; break;
            case Op::add: r = stack[sp - 2] + stack[sp - 1]; break;
            case Op::sub: r = stack[sp - 2] - stack[sp - 1]; break;
            case Op::mul: r = stack[sp - 2] * stack[sp - 1]; break;
            case Op::div:
                if (stack[sp - 1] == 0.0) throw DomainError("division by zero", subtree_string(i));
                r = stack[sp - 2] / stack[sp - 1];
                break;
            case Op::pow: r = std::pow(stack[sp - 2], stack[sp - 1]); break;
            case Op::neg: r = -stack[sp - 1]; break;
            case Op::exp: r = std::exp(stack[sp - 1]); break;
            case Op::log:
                if (!(stack[sp - 1] > 0.0)) throw DomainError("log of non-positive value", subtree_string(i));
                r = std::log(stack[sp - 1]);
                break;
            case Op::abs: r = std::fabs(stack[sp - 1]); break;
            case Op::sqrt:
                if (stack[sp - 1] < 0.0) throw DomainError("sqrt of negative value", subtree_string(i));
                r = std::sqrt(stack[sp - 1]);
                break;
            case Op::max:
                r = stack[sp - n.arity];
                for (std::size_t a = sp - n.arity + 1; a < sp; ++a) r = std::max(r, stack[a]);
                break;
            case Op::min:
                r = stack[sp - n.arity];
                for (std::size_t a = sp - n.arity + 1; a < sp; ++a) r = std::min(r, stack[a]);
                break;
        }
        if (!std::isfinite(r)) throw DomainError("non-finite result", subtree_string(i));
        sp -= n.arity;
        stack[sp++] = r;
    }
    return stack[0];
}

std::size_t CoeffExpr::subtree_begin(std::size_t root) const {
    std::size_t need = 1;
    std::size_t i = root + 1;
    while (need > 0) {
        --i;
        need = need - 1 + nodes_[i].arity;
    }
    return i;
}

namespace {

// Children of `root`, each as (begin, root) index pairs, in argument order.
template <class Begin>
std::vector<std::size_t> child_roots(const std::vector<Node>& nodes, std::size_t root, Begin begin_of) {
    std::vector<std::size_t> roots(nodes[root].arity);
    std::size_t cursor = root;
    for (std::size_t c = roots.size(); c-- > 0;) {
        roots[c] = cursor - 1;
        cursor = begin_of(cursor - 1);
    }
    return roots;
}

}  // namespace

std::string CoeffExpr::subtree_string(std::size_t root) const {
    const Node& n = nodes_[root];
    auto begin_of = [this](std::size_t r) { return subtree_begin(r); };
    switch (n.op) {
        case Op::constant: return format_number(n.value);
        case Op::time: return "t";
        case Op::state: return "x" + std::to_string(n.state_index + 1);
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow: {
            const auto kids = child_roots(nodes_, root, begin_of);
            return "(" + subtree_string(kids[0]) + " " + binary_symbol(n.op) + " " + subtree_string(kids[1]) + ")";
        }
        case Op::neg: return "-" + subtree_string(root - 1);
        default: {
            const auto kids = child_roots(nodes_, root, begin_of);
            std::string s = std::string(find_function(n.op)->name) + "(";
            for (std::size_t c = 0; c < kids.size(); ++c) {
                if (c > 0) s += ", ";
                s += subtree_string(kids[c]);
            }
            return s + ")";
        }
    }
}

std::string CoeffExpr::subtree_sexpr(std::size_t root) const {
    const Node& n = nodes_[root];
    switch (n.op) {
        case Op::constant: return "(const " + format_number(n.value) + ")";
        case Op::time: return "(var t)";
        case Op::state: return "(var x" + std::to_string(n.state_index + 1) + ")";
        default: {
            const auto kids = child_roots(nodes_, root, [this](std::size_t r) { return subtree_begin(r); });
            std::string s = std::string("(") + sexpr_name(n.op);
            for (std::size_t k : kids) s += " " + subtree_sexpr(k);
            return s + ")";
        }
    }
}

std::string CoeffExpr::to_string() const {
    std::string s = subtree_string(nodes_.size() - 1);
    // The outermost binary node needs no parentheses.
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        const Op top = nodes_.back().op;
        if (top == Op::add || top == Op::sub || top == Op::mul || top == Op::div || top == Op::pow) {
            return s.substr(1, s.size() - 2);
        }
    }
    return s;
}

std::string CoeffExpr::to_sexpr() const { return subtree_sexpr(nodes_.size() - 1); }

CoeffExpr parse_expr(std::string_view source) { return CoeffExpr::from_nodes(Parser(source).run()); }

}  // namespace switchbox
