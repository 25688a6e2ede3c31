#include "phlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "phlab/errors.hpp"

namespace phlab {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };

struct Expression::Node {
    Op op = Op::Const;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

NodePtr make_var(int i) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Var;
    n->var = i;
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// Builders fold constants so derivative trees stay small.
NodePtr make_unary(Op op, NodePtr a) {
    if (a->op == Op::Const) {
        switch (op) {
            case Op::Neg: return make_const(-a->value);
            case Op::Sin: return make_const(std::sin(a->value));
            case Op::Cos: return make_const(std::cos(a->value));
            case Op::Exp: return make_const(std::exp(a->value));
            default: break;
        }
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
    if (a->op == Op::Const && b->op == Op::Const) {
        switch (op) {
            case Op::Add: return make_const(a->value + b->value);
            case Op::Sub: return make_const(a->value - b->value);
            case Op::Mul: return make_const(a->value * b->value);
            case Op::Div: return make_const(a->value / b->value);
            default: break;
        }
    }
    switch (op) {
        case Op::Add:
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
            break;
        case Op::Sub:
            if (is_const(b, 0.0)) return a;
            if (is_const(a, 0.0)) return make_unary(Op::Neg, b);
            break;
        case Op::Mul:
            if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
            break;
        case Op::Div:
            if (is_const(a, 0.0)) return make_const(0.0);
            if (is_const(b, 1.0)) return a;
            break;
        default: break;
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

double eval(const Expression::Node& n, const Vec3& v) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return v[n.var];
        case Op::Add: return eval(*n.lhs, v) + eval(*n.rhs, v);
        case Op::Sub: return eval(*n.lhs, v) - eval(*n.rhs, v);
        case Op::Mul: return eval(*n.lhs, v) * eval(*n.rhs, v);
        case Op::Div: return eval(*n.lhs, v) / eval(*n.rhs, v);
        case Op::Neg: return -eval(*n.lhs, v);
        case Op::Sin: return std::sin(eval(*n.lhs, v));
        case Op::Cos: return std::cos(eval(*n.lhs, v));
        case Op::Exp: return std::exp(eval(*n.lhs, v));
    }
    return 0.0;
}

NodePtr diff(const NodePtr& n, int var) {
    switch (n->op) {
        case Op::Const: return make_const(0.0);
        case Op::Var: return make_const(n->var == var ? 1.0 : 0.0);
        case Op::Add: return make_binary(Op::Add, diff(n->lhs, var), diff(n->rhs, var));
        case Op::Sub: return make_binary(Op::Sub, diff(n->lhs, var), diff(n->rhs, var));
        case Op::Mul:
            return make_binary(Op::Add, make_binary(Op::Mul, diff(n->lhs, var), n->rhs),
                               make_binary(Op::Mul, n->lhs, diff(n->rhs, var)));
        case Op::Div: {
            // (u/v)' = (u' v - u v') / v^2
            NodePtr num = make_binary(Op::Sub, make_binary(Op::Mul, diff(n->lhs, var), n->rhs),
                                      make_binary(Op::Mul, n->lhs, diff(n->rhs, var)));
            return make_binary(Op::Div, num, make_binary(Op::Mul, n->rhs, n->rhs));
        }
        case Op::Neg: return make_unary(Op::Neg, diff(n->lhs, var));
        case Op::Sin: return make_binary(Op::Mul, make_unary(Op::Cos, n->lhs), diff(n->lhs, var));
        case Op::Cos:
            return make_unary(Op::Neg, make_binary(Op::Mul, make_unary(Op::Sin, n->lhs), diff(n->lhs, var)));
        case Op::Exp: return make_binary(Op::Mul, n, diff(n->lhs, var));
    }
    return make_const(0.0);
}

bool has_var(const Expression::Node& n) {
    if (n.op == Op::Var) return true;
    if (n.lhs && has_var(*n.lhs)) return true;
    return n.rhs && has_var(*n.rhs);
}

void print(const Expression::Node& n, std::ostringstream& os) {
    static const char* names[] = {"x", "y", "s"};
    switch (n.op) {
        case Op::Const: os << n.value; return;
        case Op::Var: os << names[n.var]; return;
        case Op::Neg: os << "-("; print(*n.lhs, os); os << ")"; return;
        case Op::Sin: os << "sin("; print(*n.lhs, os); os << ")"; return;
        case Op::Cos: os << "cos("; print(*n.lhs, os); os << ")"; return;
        case Op::Exp: os << "exp("; print(*n.lhs, os); os << ")"; return;
        default: break;
    }
    const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
    os << "(";
    print(*n.lhs, os);
    os << " " << sym << " ";
    print(*n.rhs, os);
    os << ")";
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != text_.size()) error("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::ParseError, what + " at column " + std::to_string(pos_ + 1) + " in '" +
                                        std::string(text_) + "'");
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = make_binary(Op::Add, lhs, term());
            } else if (accept('-')) {
                lhs = make_binary(Op::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = make_binary(Op::Mul, lhs, unary());
            } else if (accept('/')) {
                lhs = make_binary(Op::Div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make_unary(Op::Neg, unary());
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip();
        if (pos_ >= text_.size()) error("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) error("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view id = text_.substr(start, pos_ - start);
            if (id == "x") return make_var(0);
            if (id == "y") return make_var(1);
            if (id == "s") return make_var(2);
            if (id == "pi") return make_const(std::numbers::pi);
            Op op;
            if (id == "sin") {
                op = Op::Sin;
            } else if (id == "cos") {
                op = Op::Cos;
            } else if (id == "exp") {
                op = Op::Exp;
            } else {
                pos_ = start;
                error("unknown identifier '" + std::string(id) + "'");
            }
            if (!accept('(')) error("expected '(' after function name");
            NodePtr arg = expr();
            if (!accept(')')) error("expected ')'");
            return make_unary(op, arg);
        }
        error(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const std::string buffer(begin, text_.size() - pos_);
        const double v = std::strtod(buffer.c_str(), &end);
        const std::size_t used = static_cast<std::size_t>(end - buffer.c_str());
        if (used == 0) error("malformed number");
        pos_ += used;
        return make_const(v);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

Expression Expression::parse(std::string_view text) {
    Parser parser(text);
    return Expression(parser.parse(), std::string(text));
}

Expression Expression::constant(double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    return Expression(make_const(value), os.str());
}

double Expression::evaluate(const Vec3& xys) const { return eval(*root_, xys); }

Expression Expression::derivative(int coordinate) const {
    Expression d(diff(root_, coordinate), "");
    d.source_ = d.to_string();
    return d;
}

bool Expression::is_constant() const { return !has_var(*root_); }

double Expression::constant_value() const { return eval(*root_, Vec3::Zero()); }

std::string Expression::to_string() const {
    std::ostringstream os;
    os.precision(17);
    print(*root_, os);
    return os.str();
}

}  // namespace phlab
