#pragma once

#include "ccnv/field.hpp"

namespace ccnv::detail {

enum class Op : std::uint8_t {
    Const, Coord, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sin, Cos, Shift, Quad
};

using NodePtr = std::shared_ptr<const Node>;

// Shift: a = base, coord = shifted coordinate (x3), value = eps, source = u.
// Quad:  a = integrand, coord = integration coordinate, value = lower limit.
struct Node {
    Op op = Op::Const;
    double value = 0.0;
    int coord = -1;
    CoordMask mask = 0;
    NodePtr a;
    NodePtr b;
};

double evaluate(const Node& n, std::span<const double> p);
double integrate(const Node& integrand, int coord, double lower, std::span<const double> p);

}  // namespace ccnv::detail
