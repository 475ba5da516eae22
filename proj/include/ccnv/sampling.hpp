#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ccnv/field.hpp"

namespace ccnv {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Axis-aligned box in chart coordinates.
struct Region {
    std::vector<Interval> bounds;

    // u in [0.5, 2], v in [-2, 2], transverse in [-1, 1].
    static Region standard(const Chart& chart);
    int dimension() const { return static_cast<int>(bounds.size()); }
    bool u_excludes_zero() const { return bounds[kU].lo > 0.0 || bounds[kU].hi < 0.0; }
};

// std::mt19937_64 with a platform-independent mapping to [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

std::vector<Point> sample_points(const Region& region, int count, std::uint64_t seed);

// counts[c] points per axis, endpoints included; count 1 takes the midpoint.
struct GridSpec {
    Region region;
    std::vector<int> counts;

    std::size_t size() const;
    Point point(std::size_t index) const;
};

// Random expressions over the coordinates in `allowed`, drawn from a fixed
// pool of polynomial, exponential and trigonometric atoms. Output is DSL text
// so draws can be logged and replayed.
class FieldPool {
public:
    explicit FieldPool(std::uint64_t seed) : rng_(seed) {}

    // Sum of `terms` products of atoms with coefficients in [-1, 1].
    std::string expression(CoordMask allowed, int terms = 2);
    // exp(0.3*expression): strictly positive, of order one.
    std::string positive(CoordMask allowed);
    // Bounded-size expression, scaled by `scale`.
    std::string small(CoordMask allowed, double scale);

    Rng& rng() { return rng_; }

private:
    std::string atom(CoordMask allowed);
    std::string coefficient();
    Rng rng_;
};

}  // namespace ccnv
