#include "hydrostab/expr.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>

namespace hydrostab {

struct Expr::Node {
    enum Kind { number, variable, unary, binary, call } kind;
    double value = 0.0;                  // number
    std::size_t var_index = 0;           // variable
    char op = 0;                         // unary/binary
    double (*fn)(double) = nullptr;      // call
    std::unique_ptr<Node> a, b;

    double eval(const std::vector<double>& vars) const {
        switch (kind) {
            case number: return value;
            case variable: return vars[var_index];
            case unary: return -a->eval(vars);
            case call: return fn(a->eval(vars));
            case binary: {
                const double x = a->eval(vars), y = b->eval(vars);
                switch (op) {
                    case '+': return x + y;
                    case '-': return x - y;
                    case '*': return x * y;
                    case '/': return x / y;
                    case '^': return std::pow(x, y);
                }
            }
        }
        return 0.0;
    }

    std::unique_ptr<Node> clone() const {
        auto n = std::make_unique<Node>();
        n->kind = kind;
        n->value = value;
        n->var_index = var_index;
        n->op = op;
        n->fn = fn;
        if (a) n->a = a->clone();
        if (b) n->b = b->clone();
        return n;
    }
};

namespace {

struct Parser {
    const std::string& s;
    const std::vector<std::string>& vars;
    std::size_t pos = 0;

    using NodePtr = std::unique_ptr<Expr::Node>;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigurationError("expression error at position " + std::to_string(pos + 1) +
                                 ": " + msg + " in '" + s + "'");
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr make_num(double v) {
        auto n = std::make_unique<Expr::Node>();
        n->kind = Expr::Node::number;
        n->value = v;
        return n;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (pos >= s.size() || (s[pos] != '+' && s[pos] != '-')) return lhs;
            const char op = s[pos++];
            NodePtr rhs = parse_term();
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::binary;
            n->op = op;
            n->a = std::move(lhs);
            n->b = std::move(rhs);
            lhs = std::move(n);
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (pos >= s.size() || (s[pos] != '*' && s[pos] != '/')) return lhs;
            const char op = s[pos++];
            NodePtr rhs = parse_unary();
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::binary;
            n->op = op;
            n->a = std::move(lhs);
            n->b = std::move(rhs);
            lhs = std::move(n);
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        if (consume('-')) {
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::unary;
            n->a = parse_unary();
            return n;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        if (pos < s.size() && s[pos] == '^') {
            ++pos;
            NodePtr exp = parse_unary();  // right associative
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::binary;
            n->op = '^';
            n->a = std::move(base);
            n->b = std::move(exp);
            return n;
        }
        return base;
    }

    static double (*lookup_fn(const std::string& name))(double) {
        if (name == "sin") return [](double x) { return std::sin(x); };
        if (name == "cos") return [](double x) { return std::cos(x); };
        if (name == "tan") return [](double x) { return std::tan(x); };
        if (name == "exp") return [](double x) { return std::exp(x); };
        if (name == "log") return [](double x) { return std::log(x); };
        if (name == "sqrt") return [](double x) { return std::sqrt(x); };
        if (name == "abs") return [](double x) { return std::abs(x); };
        if (name == "tanh") return [](double x) { return std::tanh(x); };
        if (name == "sinh") return [](double x) { return std::sinh(x); };
        if (name == "cosh") return [](double x) { return std::cosh(x); };
        return nullptr;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of expression");
        const char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!consume(')')) fail("missing ')'");
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - s.c_str());
            return make_num(v);
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = pos;
            while (pos < s.size() &&
                   ((s[pos] >= 'a' && s[pos] <= 'z') || (s[pos] >= 'A' && s[pos] <= 'Z') ||
                    (s[pos] >= '0' && s[pos] <= '9') || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            skip_ws();
            if (pos < s.size() && s[pos] == '(') {
                auto fn = lookup_fn(name);
                if (!fn) fail("unknown function '" + name + "'");
                ++pos;
                NodePtr arg = parse_expr();
                if (!consume(')')) fail("missing ')' after argument of " + name);
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::call;
                n->fn = fn;
                n->a = std::move(arg);
                return n;
            }
            if (name == "pi") return make_num(3.14159265358979323846);
            if (name == "e") return make_num(2.71828182845904523536);
            for (std::size_t k = 0; k < vars.size(); ++k)
                if (vars[k] == name) {
                    auto n = std::make_unique<Expr::Node>();
                    n->kind = Expr::Node::variable;
                    n->var_index = k;
                    return n;
                }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expr::Expr() = default;
Expr::~Expr() = default;
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;

Expr::Expr(const Expr& o) : root_(o.root_ ? o.root_->clone() : nullptr), text_(o.text_), nvars_(o.nvars_) {}

Expr& Expr::operator=(const Expr& o) {
    if (this != &o) {
        root_ = o.root_ ? o.root_->clone() : nullptr;
        text_ = o.text_;
        nvars_ = o.nvars_;
    }
    return *this;
}

Expr Expr::compile(const std::string& text, const std::vector<std::string>& variables) {
    Parser p{text, variables};
    Expr e;
    e.text_ = text;
    e.nvars_ = variables.size();
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

double Expr::eval(const std::vector<double>& values) const {
    if (values.size() < nvars_)
        throw StructuralError("expression evaluated with too few variable values");
    return root_->eval(values);
}

}  // namespace hydrostab
