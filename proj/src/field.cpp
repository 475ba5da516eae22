#include "ccnv/field.hpp"

#include <cmath>
#include <cstdio>

#include "field_node.hpp"

namespace ccnv {

using detail::Node;
using detail::NodePtr;
using detail::Op;

Chart::Chart(int dimension) : dim_(dimension) {
    if (dimension < 4 || dimension > kMaxDimension)
        throw Error("chart dimension must lie in [4, " + std::to_string(kMaxDimension) +
                    "], got " + std::to_string(dimension));
}

std::optional<int> Chart::index_of(std::string_view label) const {
    if (label == "u") return kU;
    if (label == "v") return kV;
    if (label.size() < 2 || label[0] != 'x') return std::nullopt;
    int e = 0;
    for (char c : label.substr(1)) {
        if (c < '0' || c > '9') return std::nullopt;
        e = e * 10 + (c - '0');
        if (e > 1000) return std::nullopt;
    }
    if (label[1] == '0' || e < 3 || e > dim_) return std::nullopt;
    return e - 1;
}

std::vector<std::string> Chart::labels() const {
    std::vector<std::string> out;
    for (int c = 0; c < dim_; ++c) out.push_back(coordinate_label(c));
    return out;
}

std::string coordinate_label(int coord) {
    if (coord == kU) return "u";
    if (coord == kV) return "v";
    return "x" + std::to_string(coord + 1);
}

std::string mask_labels(CoordMask mask) {
    std::string out;
    for (int c = 0; c < kMaxDimension; ++c) {
        if (!(mask & bit(c))) continue;
        if (!out.empty()) out += ", ";
        out += coordinate_label(c);
    }
    return "{" + out + "}";
}

namespace {

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

const NodePtr& zero_node() {
    static const NodePtr z = make_const(0.0);
    return z;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->mask = a->mask | (b ? b->mask : 0);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

std::optional<double> folded(double v) {
    if (std::isfinite(v)) return v;
    return std::nullopt;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make_node(Op::Add, a, b);
}

NodePtr neg(const NodePtr& a) {
    if (a->op == Op::Const) return make_const(-a->value);
    if (a->op == Op::Neg) return a->a;
    return make_node(Op::Neg, a);
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(b);
    if (a == b) return zero_node();
    return make_node(Op::Sub, a, b);
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return zero_node();
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a, -1.0)) return neg(b);
    if (is_const(b, -1.0)) return neg(a);
    return make_node(Op::Mul, a, b);
}

NodePtr div(const NodePtr& a, const NodePtr& b) {
    if (a->op == Op::Const && b->op == Op::Const && b->value != 0.0)
        return make_const(a->value / b->value);
    if (is_const(a, 0.0)) return zero_node();
    if (is_const(b, 1.0)) return a;
    return make_node(Op::Div, a, b);
}

NodePtr power(const NodePtr& a, const NodePtr& b) {
    if (is_const(b, 0.0)) return make_const(1.0);
    if (is_const(b, 1.0)) return a;
    if (is_const(a, 1.0)) return make_const(1.0);
    if (a->op == Op::Const && b->op == Op::Const)
        if (auto v = folded(std::pow(a->value, b->value))) return make_const(*v);
    return make_node(Op::Pow, a, b);
}

NodePtr unary(Op op, const NodePtr& a) {
    if (a->op == Op::Const) {
        double x = a->value;
        std::optional<double> v;
        switch (op) {
            case Op::Exp: v = folded(std::exp(x)); break;
            case Op::Log: if (x > 0) v = std::log(x); break;
            case Op::Sin: v = std::sin(x); break;
            case Op::Cos: v = std::cos(x); break;
            default: break;
        }
        if (v) return make_const(*v);
    }
    return make_node(op, a);
}

NodePtr shift_node(const NodePtr& base, double eps) {
    if (eps == 0.0 || !(base->mask & bit(kX3))) return base;
    if (base->op == Op::Shift) return shift_node(base->a, base->value + eps);
    auto n = std::make_shared<Node>();
    n->op = Op::Shift;
    n->value = eps;
    n->coord = kX3;
    n->mask = base->mask | bit(kU);
    n->a = base;
    return n;
}

NodePtr coord_node(int c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Coord;
    n->coord = c;
    n->mask = bit(c);
    return n;
}

NodePtr quad_node(const NodePtr& integrand, int coord, double lower) {
    if (is_const(integrand, 0.0)) return zero_node();
    if (!(integrand->mask & bit(coord)))
        return mul(sub(coord_node(coord), make_const(lower)), integrand);
    auto n = std::make_shared<Node>();
    n->op = Op::Quad;
    n->value = lower;
    n->coord = coord;
    n->mask = integrand->mask | bit(coord);
    n->a = integrand;
    return n;
}

NodePtr derivative(const NodePtr& n, int c) {
    if (!(n->mask & bit(c))) return zero_node();
    const NodePtr& a = n->a;
    const NodePtr& b = n->b;
    switch (n->op) {
        case Op::Const: return zero_node();
        case Op::Coord: return make_const(1.0);
        case Op::Add: return add(derivative(a, c), derivative(b, c));
        case Op::Sub: return sub(derivative(a, c), derivative(b, c));
        case Op::Mul: return add(mul(derivative(a, c), b), mul(a, derivative(b, c)));
        case Op::Div:
            return sub(div(derivative(a, c), b), div(mul(a, derivative(b, c)), mul(b, b)));
        case Op::Pow:
            if (b->op == Op::Const)
                return mul(mul(make_const(b->value), power(a, make_const(b->value - 1.0))),
                           derivative(a, c));
            if (a->op == Op::Const)
                return mul(mul(n, make_const(std::log(a->value))), derivative(b, c));
            return mul(n, add(mul(derivative(b, c), unary(Op::Log, a)),
                              div(mul(b, derivative(a, c)), a)));
        case Op::Neg: return neg(derivative(a, c));
        case Op::Exp: return mul(n, derivative(a, c));
        case Op::Log: return div(derivative(a, c), a);
        case Op::Sin: return mul(unary(Op::Cos, a), derivative(a, c));
        case Op::Cos: return neg(mul(unary(Op::Sin, a), derivative(a, c)));
        case Op::Shift: {
            NodePtr d = shift_node(derivative(a, c), n->value);
            if (c == kU)
                d = sub(d, mul(make_const(n->value), shift_node(derivative(a, kX3), n->value)));
            return d;
        }
        case Op::Quad:
            if (c == n->coord) return a;
            return quad_node(derivative(a, c), n->coord, n->value);
    }
    return zero_node();
}

NodePtr substituted(const NodePtr& n, int c, double value) {
    if (!(n->mask & bit(c))) return n;
    switch (n->op) {
        case Op::Coord: return make_const(value);
        case Op::Add: return add(substituted(n->a, c, value), substituted(n->b, c, value));
        case Op::Sub: return sub(substituted(n->a, c, value), substituted(n->b, c, value));
        case Op::Mul: return mul(substituted(n->a, c, value), substituted(n->b, c, value));
        case Op::Div: return div(substituted(n->a, c, value), substituted(n->b, c, value));
        case Op::Pow: return power(substituted(n->a, c, value), substituted(n->b, c, value));
        case Op::Neg: return neg(substituted(n->a, c, value));
        case Op::Exp:
        case Op::Log:
        case Op::Sin:
        case Op::Cos: return unary(n->op, substituted(n->a, c, value));
        case Op::Shift:
            if (c == kU || c == kX3) break;
            return shift_node(substituted(n->a, c, value), n->value);
        case Op::Quad:
            if (c == n->coord) break;
            return quad_node(substituted(n->a, c, value), n->coord, n->value);
        case Op::Const: return n;
    }
    throw Error("cannot substitute " + coordinate_label(c) + " inside a shift or quadrature");
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the short form when it round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shortbuf[32];
        std::snprintf(shortbuf, sizeof shortbuf, "%.*g", prec, v);
        if (std::strtod(shortbuf, nullptr) == v) return shortbuf;
    }
    return buf;
}

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        case Op::Const: return n.value < 0 ? 3 : 5;
        default: return 5;
    }
}

std::string print(const Node& n);

std::string wrap(const Node& n, bool parens) {
    return parens ? "(" + print(n) + ")" : print(n);
}

std::string print(const Node& n) {
    int p = precedence(n);
    switch (n.op) {
        case Op::Const: return number(n.value);
        case Op::Coord: return coordinate_label(n.coord);
        case Op::Add: return print(*n.a) + " + " + wrap(*n.b, precedence(*n.b) < 2);
        case Op::Sub: return print(*n.a) + " - " + wrap(*n.b, precedence(*n.b) <= 1 ||
                                                                 precedence(*n.b) == 3);
        case Op::Mul: return wrap(*n.a, precedence(*n.a) < p) + "*" + wrap(*n.b, precedence(*n.b) <= p);
        case Op::Div: return wrap(*n.a, precedence(*n.a) < p) + "/" + wrap(*n.b, precedence(*n.b) <= p);
        case Op::Pow: return wrap(*n.a, precedence(*n.a) <= p) + "^" + wrap(*n.b, precedence(*n.b) < 3);
        case Op::Neg: return "-" + wrap(*n.a, precedence(*n.a) < 3);
        case Op::Exp: return "exp(" + print(*n.a) + ")";
        case Op::Log: return "log(" + print(*n.a) + ")";
        case Op::Sin: return "sin(" + print(*n.a) + ")";
        case Op::Cos: return "cos(" + print(*n.a) + ")";
        case Op::Shift: return "shift(" + print(*n.a) + ", " + number(n.value) + ")";
        case Op::Quad:
            return "integral(" + print(*n.a) + ", " + coordinate_label(n.coord) + ", " +
                   number(n.value) + ")";
    }
    return "?";
}

}  // namespace

namespace detail {

double evaluate(const Node& n, std::span<const double> p) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Coord: return p[n.coord];
        case Op::Add: return evaluate(*n.a, p) + evaluate(*n.b, p);
        case Op::Sub: return evaluate(*n.a, p) - evaluate(*n.b, p);
        case Op::Mul: return evaluate(*n.a, p) * evaluate(*n.b, p);
        case Op::Div: {
            double den = evaluate(*n.b, p);
            if (den == 0.0) throw DomainError("division by zero");
            return evaluate(*n.a, p) / den;
        }
        case Op::Pow: {
            double x = evaluate(*n.a, p);
            double y = evaluate(*n.b, p);
            if (x == 0.0 && y < 0.0) throw DomainError("zero raised to a negative power");
            if (x < 0.0 && y != std::floor(y))
                throw DomainError("negative base with non-integer exponent");
            return std::pow(x, y);
        }
        case Op::Neg: return -evaluate(*n.a, p);
        case Op::Exp: return std::exp(evaluate(*n.a, p));
        case Op::Log: {
            double x = evaluate(*n.a, p);
            if (!(x > 0.0)) throw DomainError("log of non-positive value");
            return std::log(x);
        }
        case Op::Sin: return std::sin(evaluate(*n.a, p));
        case Op::Cos: return std::cos(evaluate(*n.a, p));
        case Op::Shift: {
            double buf[kMaxDimension];
            std::size_t d = p.size();
            for (std::size_t i = 0; i < d; ++i) buf[i] = p[i];
            buf[n.coord] -= n.value * buf[kU];
            return evaluate(*n.a, std::span<const double>(buf, d));
        }
        case Op::Quad: return integrate(*n.a, n.coord, n.value, p);
    }
    return 0.0;
}

}  // namespace detail

ScalarField::ScalarField() : node_(zero_node()) {}
ScalarField::ScalarField(double value) : node_(make_const(value)) {}

ScalarField ScalarField::coordinate(int coord) {
    if (coord < 0 || coord >= kMaxDimension) throw Error("coordinate index out of range");
    return ScalarField(coord_node(coord));
}

double ScalarField::operator()(std::span<const double> p) const {
    return detail::evaluate(*node_, p);
}

ScalarField::Kind ScalarField::kind() const {
    switch (node_->op) {
        case Op::Const: return Kind::Constant;
        case Op::Shift: return Kind::ShiftedComposite;
        case Op::Quad: return Kind::QuadratureField;
        default: return Kind::SymbolicTree;
    }
}

CoordMask ScalarField::mask() const { return node_->mask; }
bool ScalarField::is_zero() const { return is_const(node_, 0.0); }

namespace {
bool contains_quad(const Node* n) {
    if (!n) return false;
    return n->op == Op::Quad || contains_quad(n->a.get()) || contains_quad(n->b.get());
}
}  // namespace

bool ScalarField::has_quadrature() const { return contains_quad(node_.get()); }

std::optional<double> ScalarField::constant_value() const {
    if (node_->op == Op::Const) return node_->value;
    return std::nullopt;
}

bool ScalarField::is_coordinate(int coord) const {
    return node_->op == Op::Coord && node_->coord == coord;
}

std::string ScalarField::str() const { return print(*node_); }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return ScalarField(add(a.ptr(), b.ptr()));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return ScalarField(sub(a.ptr(), b.ptr()));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return ScalarField(mul(a.ptr(), b.ptr()));
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    return ScalarField(div(a.ptr(), b.ptr()));
}
ScalarField operator-(const ScalarField& a) { return ScalarField(neg(a.ptr())); }
ScalarField pow(const ScalarField& base, const ScalarField& exponent) {
    return ScalarField(power(base.ptr(), exponent.ptr()));
}
ScalarField exp(const ScalarField& a) { return ScalarField(unary(Op::Exp, a.ptr())); }
ScalarField log(const ScalarField& a) { return ScalarField(unary(Op::Log, a.ptr())); }
ScalarField sin(const ScalarField& a) { return ScalarField(unary(Op::Sin, a.ptr())); }
ScalarField cos(const ScalarField& a) { return ScalarField(unary(Op::Cos, a.ptr())); }

ScalarField shift(const ScalarField& base, double eps) {
    return ScalarField(shift_node(base.ptr(), eps));
}

ScalarField differentiate(const ScalarField& f, int coord) {
    return ScalarField(derivative(f.ptr(), coord));
}

ScalarField antiderivative(const ScalarField& f, int coord, double lower) {
    return ScalarField(quad_node(f.ptr(), coord, lower));
}

ScalarField characteristic_integral(const ScalarField& f, double eps) {
    return shift(antiderivative(shift(f, -eps), kU, 0.0), eps);
}

ScalarField substitute(const ScalarField& f, int coord, double value) {
    return ScalarField(substituted(f.ptr(), coord, value));
}

}  // namespace ccnv
