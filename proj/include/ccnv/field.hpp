#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccnv {

// Coordinate indices: u = 0, v = 1, x3 = 2, ..., xD = D-1.
inline constexpr int kU = 0;
inline constexpr int kV = 1;
inline constexpr int kX3 = 2;
inline constexpr int kMaxDimension = 16;

using CoordMask = std::uint32_t;

constexpr CoordMask bit(int coord) { return CoordMask{1} << coord; }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Raised by evaluation: division by zero, log of non-positive, bad pow.
class DomainError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class Chart {
public:
    explicit Chart(int dimension);

    int dimension() const noexcept { return dim_; }
    int transverse_count() const noexcept { return dim_ - 2; }
    CoordMask all() const noexcept { return (CoordMask{1} << dim_) - 1; }
    CoordMask transverse() const noexcept { return all() & ~(bit(kU) | bit(kV)); }

    std::optional<int> index_of(std::string_view label) const;
    std::vector<std::string> labels() const;

private:
    int dim_;
};

// "u", "v", "x3", ...
std::string coordinate_label(int coord);
std::string mask_labels(CoordMask mask);

// Transverse leg i in {3..D} stored at 0-based index i-3; coordinate x_e at e-1.
constexpr int transverse_coord(int leg) { return leg + kX3; }

using Point = std::vector<double>;

namespace detail {
struct Node;
}

class ScalarField {
public:
    enum class Kind { Constant, SymbolicTree, ShiftedComposite, QuadratureField };

    ScalarField();
    ScalarField(double value);  // NOLINT: implicit so literals mix into arithmetic

    static ScalarField coordinate(int coord);

    double operator()(std::span<const double> p) const;
    double eval(std::span<const double> p) const { return (*this)(p); }

    Kind kind() const;
    CoordMask mask() const;
    bool depends_on(int coord) const { return (mask() & bit(coord)) != 0; }
    bool is_zero() const;
    bool has_quadrature() const;
    std::optional<double> constant_value() const;
    // True when the field is exactly the bare coordinate.
    bool is_coordinate(int coord) const;

    std::string str() const;

    const detail::Node& node() const { return *node_; }
    const std::shared_ptr<const detail::Node>& ptr() const { return node_; }
    explicit ScalarField(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<const detail::Node> node_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField pow(const ScalarField& base, const ScalarField& exponent);
ScalarField exp(const ScalarField& a);
ScalarField log(const ScalarField& a);
ScalarField sin(const ScalarField& a);
ScalarField cos(const ScalarField& a);

// f evaluated at x3 -> x3 - eps*u.
ScalarField shift(const ScalarField& base, double eps);

ScalarField differentiate(const ScalarField& f, int coord);

// F with dF/dx_coord = f and F = 0 at x_coord = lower.
ScalarField antiderivative(const ScalarField& f, int coord, double lower);

// int_0^u f(z, x3 - eps*u + eps*z, x^n) dz, built from a quadrature wrapped in shifts.
ScalarField characteristic_integral(const ScalarField& f, double eps);

// Replaces coordinate `coord` by a constant. Only defined for trees without
// shift or quadrature nodes that involve `coord`.
ScalarField substitute(const ScalarField& f, int coord, double value);

ScalarField parse_field(std::string_view text, const Chart& chart);

}  // namespace ccnv
